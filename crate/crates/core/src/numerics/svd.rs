use alloc::vec::Vec;

use num_complex::Complex64;

use super::{ComplexMatrix, ComplexVector, ZERO};
use crate::{Error, Result};

/// Singular values at or below this are treated as zero.
pub const RANK_THRESHOLD: f64 = 1e-12;

const SWEEP_LIMIT: usize = 100;
const OFF_TOL: f64 = 1e-15;

/// Thin SVD `M = W diag(Σ) V†`.
///
/// For an `r x c` input there are `k = min(r, c)` singular values; `W` is
/// `r x k` and `V` is `c x k`.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub left_vectors: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub right_vectors: ComplexMatrix,
    pub rank: usize,
}

impl SvdResult {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let s: Vec<Complex64> = self.singular_values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.left_vectors.matmul(&ComplexMatrix::diagonal(&s)).matmul(&self.right_vectors.adjoint())
    }
}

/// One-sided Jacobi SVD.
pub fn svd(m: &ComplexMatrix) -> Result<SvdResult> {
    if !m.is_finite() {
        return Err(Error::invalid("svd input must be finite"));
    }
    if m.rows() == 0 || m.cols() == 0 {
        return Err(Error::invalid("svd input must be nonempty"));
    }
    let (mut w, sigma, mut v) = if m.rows() >= m.cols() {
        tall_svd(m)
    } else {
        let (w, s, v) = tall_svd(&m.adjoint());
        (v, s, w)
    };
    fix_phases(&mut w, &mut v);
    let rank = sigma.iter().filter(|&&s| s > RANK_THRESHOLD).count();
    Ok(SvdResult { left_vectors: w, singular_values: sigma, right_vectors: v, rank })
}

fn tall_svd(m: &ComplexMatrix) -> (ComplexMatrix, Vec<f64>, ComplexMatrix) {
    let rows = m.rows();
    let n = m.cols();
    // Column-major working copies.
    let mut u: Vec<Vec<Complex64>> = (0..n).map(|c| m.column(c).into_vec()).collect();
    let mut v: Vec<Vec<Complex64>> = (0..n).map(|c| ComplexVector::basis(n, c).into_vec()).collect();

    for _ in 0..SWEEP_LIMIT {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha: f64 = u[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = u[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex64 = u[p].iter().zip(&u[q]).map(|(a, b)| a.conj() * b).sum();
                let g = gamma.norm();
                if g == 0.0 || g <= OFF_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let e = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let sign = if zeta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut u, p, q, e.conj(), c, s);
                rotate(&mut v, p, q, e.conj(), c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = u.iter().map(|col| col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap_or(core::cmp::Ordering::Equal));

    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let smax = sigma.first().copied().unwrap_or(0.0);
    let cutoff = (smax * 1e-14).max(f64::MIN_POSITIVE);

    let mut wcols: Vec<Option<Vec<Complex64>>> = order
        .iter()
        .map(|&j| {
            if norms[j] > cutoff {
                let inv = 1.0 / norms[j];
                Some(u[j].iter().map(|z| z * inv).collect())
            } else {
                None
            }
        })
        .collect();
    orthonormalize(&mut wcols, rows);

    let mut wm = ComplexMatrix::zeros(rows, n);
    let mut vm = ComplexMatrix::zeros(n, n);
    for (k, &j) in order.iter().enumerate() {
        wm.set_column(k, wcols[k].as_ref().expect("completed column"));
        vm.set_column(k, &v[j]);
    }
    (wm, sigma, vm)
}

fn rotate(cols: &mut [Vec<Complex64>], p: usize, q: usize, phase: Complex64, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(q);
    let (cp, cq) = (&mut lo[p], &mut hi[0]);
    for (a, b) in cp.iter_mut().zip(cq.iter_mut()) {
        let bt = *b * phase;
        let na = *a * c - bt * s;
        let nb = *a * s + bt * c;
        *a = na;
        *b = nb;
    }
}

/// Two passes of modified Gram-Schmidt; missing columns are filled from the
/// standard basis.
fn orthonormalize(cols: &mut [Option<Vec<Complex64>>], dim: usize) {
    let mut basis_next = 0usize;
    for k in 0..cols.len() {
        loop {
            let mut cand = match cols[k].take() {
                Some(c) => c,
                None => {
                    if basis_next >= dim {
                        panic!("ran out of basis vectors while completing SVD");
                    }
                    let e = ComplexVector::basis(dim, basis_next).into_vec();
                    basis_next += 1;
                    e
                }
            };
            let before = norm(&cand);
            for _ in 0..2 {
                for prev in cols[..k].iter().flatten() {
                    let proj: Complex64 = prev.iter().zip(&cand).map(|(a, b)| a.conj() * b).sum();
                    for (x, y) in cand.iter_mut().zip(prev) {
                        *x -= proj * y;
                    }
                }
            }
            let after = norm(&cand);
            if after > 1e-8 * before.max(1e-300) && after > 0.0 {
                let inv = 1.0 / after;
                cols[k] = Some(cand.iter().map(|z| z * inv).collect());
                break;
            }
        }
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn fix_phases(w: &mut ComplexMatrix, v: &mut ComplexMatrix) {
    for k in 0..v.cols() {
        let mut best = 0;
        let mut best_abs = -1.0;
        for r in 0..v.rows() {
            let a = v[(r, k)].norm();
            if a > best_abs {
                best_abs = a;
                best = r;
            }
        }
        let z = v[(best, k)];
        if z.norm() == 0.0 {
            continue;
        }
        let phase = (z / z.norm()).conj();
        for r in 0..v.rows() {
            v[(r, k)] *= phase;
        }
        v[(best, k)] = Complex64::new(v[(best, k)].re.max(0.0), 0.0);
        for r in 0..w.rows() {
            w[(r, k)] *= phase;
        }
    }
}

/// `(σ_max, σ_min)`: the first and last entries of the singular values.
pub fn singular_extrema(m: &ComplexMatrix) -> Result<(f64, f64)> {
    let s = svd(m)?;
    let first = s.singular_values[0];
    let last = *s.singular_values.last().expect("nonempty");
    Ok((first, last))
}

/// `M⁺ y`, dropping singular values at or below [`RANK_THRESHOLD`].
pub fn pseudoinverse_solve(m: &ComplexMatrix, y: &ComplexVector) -> Result<ComplexVector> {
    if y.dim() != m.rows() {
        return Err(Error::invalid("right-hand side length does not match matrix rows"));
    }
    let s = svd(m)?;
    let wy = s.left_vectors.adjoint().mul_vec(y)?;
    let mut scaled = wy.into_vec();
    for (z, &sig) in scaled.iter_mut().zip(&s.singular_values) {
        *z = if sig > RANK_THRESHOLD { *z / sig } else { ZERO };
    }
    s.right_vectors.mul_vec(&ComplexVector { entries: scaled })
}
