use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::numerics::{ComplexMatrix, ComplexVector};
use crate::{Error, Result};

/// Seeded tridiagonal Toeplitz system of size `2^n_qubits`: sub-diagonal
/// `z₁`, diagonal `z₂`, super-diagonal `z₃`, with every real and imaginary
/// part (and those of `y`) uniform on `(−1, 1)` from a ChaCha8 stream.
pub fn random_complex_tridiagonal(n_qubits: usize, seed: u64) -> Result<(ComplexMatrix, ComplexVector)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_complex_tridiagonal_with(n_qubits, || rng.gen_range(-1.0..1.0))
}

/// Same layout with values from `draw`, consumed as `a, b, c, d, e, f`
/// (`z₁ = a+bi`, `z₂ = c+di`, `z₃ = e+fi`) and then `g_k, h_k` per entry of `y`.
pub fn random_complex_tridiagonal_with(
    n_qubits: usize,
    mut draw: impl FnMut() -> f64,
) -> Result<(ComplexMatrix, ComplexVector)> {
    if n_qubits == 0 || n_qubits > 12 {
        return Err(Error::invalid("n_qubits must lie in 1..=12"));
    }
    let n = 1usize << n_qubits;
    let mut z = [Complex64::new(0.0, 0.0); 3];
    for zi in &mut z {
        let re = draw();
        *zi = Complex64::new(re, draw());
    }
    let [z1, z2, z3] = z;
    let mut a = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = z2;
        if i > 0 {
            a[(i, i - 1)] = z1;
        }
        if i + 1 < n {
            a[(i, i + 1)] = z3;
        }
    }
    let y: Vec<Complex64> = (0..n)
        .map(|_| {
            let g = draw();
            Complex64::new(g, draw())
        })
        .collect();
    Ok((a, ComplexVector::new(y)?))
}
