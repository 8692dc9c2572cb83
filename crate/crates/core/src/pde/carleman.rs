use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::numerics::{ComplexMatrix, ComplexVector};
use crate::{Error, Result};

/// Largest assembled Carleman matrix dimension.
pub const MAX_CARLEMAN_DIMENSION: usize = 1024;

/// `du/dt = F₀ + F₁ u + F₂ (u ⊗ u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticODE {
    pub f0: ComplexVector,
    pub f1: ComplexMatrix,
    /// `n x n²`, column `i·n + j` multiplies `u_i u_j`.
    pub f2: ComplexMatrix,
}

impl QuadraticODE {
    pub fn new(f0: ComplexVector, f1: ComplexMatrix, f2: ComplexMatrix) -> Result<Self> {
        let n = f0.dim();
        if n == 0 || f1.rows() != n || f1.cols() != n || f2.rows() != n || f2.cols() != n * n {
            return Err(Error::invalid("quadratic ODE shapes must be n, n x n and n x n^2"));
        }
        Ok(Self { f0, f1, f2 })
    }

    pub fn dim(&self) -> usize {
        self.f0.dim()
    }

    /// Right-hand side at `u`.
    pub fn rhs(&self, u: &ComplexVector) -> Result<ComplexVector> {
        let lin = self.f1.mul_vec(u)?;
        let quad = self.f2.mul_vec(&u.kron(u))?;
        let out: Vec<Complex64> = (0..self.dim()).map(|i| self.f0[i] + lin[i] + quad[i]).collect();
        ComplexVector::new(out)
    }
}

/// The Carleman system truncated at level `N`, `dy/dt = A y + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct CarlemanSystem {
    pub truncation: usize,
    /// Size `n` of the underlying ODE.
    pub n: usize,
    /// Blocks that can be nonzero, keyed by `(row level, column level)`, levels from 1.
    pub blocks: BTreeMap<(usize, usize), ComplexMatrix>,
    pub a: ComplexMatrix,
    pub dimension: usize,
    /// `[u; u⊗u; …]` for the initial state, zero until set.
    pub y_in: ComplexVector,
    /// `[F₀; 0; …]`.
    pub b: ComplexVector,
}

impl CarlemanSystem {
    /// Start index of level `j` (from 1) in the stacked vector.
    pub fn level_offset(&self, j: usize) -> usize {
        (1..j).map(|i| self.n.pow(i as u32)).sum()
    }

    pub fn with_initial(mut self, u_in: &ComplexVector) -> Result<Self> {
        if u_in.dim() != self.n {
            return Err(Error::invalid("initial state has the wrong length"));
        }
        self.y_in = carleman_initial_state(u_in, self.truncation)?;
        Ok(self)
    }

    /// The level-1 part of a stacked state.
    pub fn level_one(&self, y: &ComplexVector) -> ComplexVector {
        ComplexVector::new(y.as_slice()[..self.n].to_vec()).expect("finite slice")
    }
}

/// `Σ_ν I^{⊗(ν−1)} ⊗ F ⊗ I^{⊗(j−ν)}` over `ν = 1 … j`.
fn kron_sum(f: &ComplexMatrix, n: usize, j: usize) -> ComplexMatrix {
    let mut total: Option<ComplexMatrix> = None;
    for nu in 1..=j {
        let left = ComplexMatrix::identity(n.pow(nu as u32 - 1));
        let right = ComplexMatrix::identity(n.pow((j - nu) as u32));
        let term = left.kron(f).kron(&right);
        total = Some(match total {
            None => term,
            Some(t) => t.add(&term),
        });
    }
    total.expect("j >= 1")
}

pub fn carleman_matrix(ode: &QuadraticODE, truncation: usize) -> Result<CarlemanSystem> {
    if truncation == 0 {
        return Err(Error::invalid("truncation order must be at least 1"));
    }
    let n = ode.dim();
    let mut dimension = 0usize;
    for j in 1..=truncation {
        let level = u32::try_from(j).ok().and_then(|j| n.checked_pow(j));
        dimension = match level.and_then(|l| dimension.checked_add(l)) {
            Some(d) if d <= MAX_CARLEMAN_DIMENSION => d,
            _ => {
                return Err(Error::resource(format!(
                    "Carleman dimension exceeds {MAX_CARLEMAN_DIMENSION} at n = {n}, N = {truncation}"
                )))
            }
        };
    }
    let f0_col = ComplexMatrix::new(n, 1, ode.f0.as_slice().to_vec())?;
    let mut blocks = BTreeMap::new();
    for j in 1..=truncation {
        blocks.insert((j, j), kron_sum(&ode.f1, n, j));
        if j < truncation {
            blocks.insert((j, j + 1), kron_sum(&ode.f2, n, j));
        }
        if j >= 2 && ode.f0.max_abs() > 0.0 {
            blocks.insert((j, j - 1), kron_sum(&f0_col, n, j));
        }
    }
    let mut sys = CarlemanSystem {
        truncation,
        n,
        blocks,
        a: ComplexMatrix::zeros(dimension, dimension),
        dimension,
        y_in: ComplexVector::zeros(dimension),
        b: ComplexVector::zeros(dimension),
    };
    let mut a = ComplexMatrix::zeros(dimension, dimension);
    for (&(r, c), blk) in &sys.blocks {
        a.set_block(sys.level_offset(r), sys.level_offset(c), blk);
    }
    sys.a = a;
    for i in 0..n {
        sys.b[i] = ode.f0[i];
    }
    Ok(sys)
}

/// `[u; u⊗u; …; u^{⊗N}]`.
pub fn carleman_initial_state(u_in: &ComplexVector, truncation: usize) -> Result<ComplexVector> {
    if truncation == 0 {
        return Err(Error::invalid("truncation order must be at least 1"));
    }
    let mut out = Vec::new();
    let mut power = u_in.clone();
    for j in 1..=truncation {
        out.extend_from_slice(power.as_slice());
        if j < truncation {
            power = power.kron(u_in);
        }
    }
    ComplexVector::new(out)
}

/// Backward-Euler step `L y^{k+1} = B` with `L = I − AΔt`, `B = y^k + bΔt`.
pub fn carleman_implicit_system(
    sys: &CarlemanSystem,
    y_k: &ComplexVector,
    dt: f64,
) -> Result<(ComplexMatrix, ComplexVector)> {
    if y_k.dim() != sys.dimension {
        return Err(Error::invalid("state length differs from the Carleman dimension"));
    }
    let l = ComplexMatrix::identity(sys.dimension).sub(&sys.a.scaled_real(dt));
    let entries: Vec<Complex64> = y_k.iter().zip(sys.b.iter()).map(|(y, b)| y + b * dt).collect();
    Ok((l, ComplexVector::new(entries)?))
}

/// Central-difference viscous Burgers on `S` grid points of `[0, 1]` with zero
/// Dirichlet ends; the unknowns are the `S − 2` interior points.
pub fn burgers_ode(s: usize, nu: f64) -> Result<QuadraticODE> {
    if s < 4 {
        return Err(Error::invalid("Burgers grid needs at least 4 points"));
    }
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(Error::invalid("viscosity must be finite and nonnegative"));
    }
    let n = s - 2;
    let dx = 1.0 / (s - 1) as f64;
    let l1 = nu / (dx * dx);
    let l2 = -1.0 / (2.0 * dx);
    let mut f1 = ComplexMatrix::zeros(n, n);
    let mut f2 = ComplexMatrix::zeros(n, n * n);
    for i in 0..n {
        f1[(i, i)] = Complex64::new(-2.0 * l1, 0.0);
        if i + 1 < n {
            f1[(i, i + 1)] = Complex64::new(l1, 0.0);
            f2[(i, i * n + i + 1)] = Complex64::new(l2, 0.0);
        }
        if i > 0 {
            f1[(i, i - 1)] = Complex64::new(l1, 0.0);
            f2[(i, i * n + i - 1)] = Complex64::new(-l2, 0.0);
        }
    }
    QuadraticODE::new(ComplexVector::zeros(n), f1, f2)
}

/// `sin(2πx)` at the interior points of an `S`-point grid.
pub fn burgers_initial_state(s: usize) -> Result<ComplexVector> {
    if s < 3 {
        return Err(Error::invalid("Burgers grid needs interior points"));
    }
    let dx = 1.0 / (s - 1) as f64;
    let vals: Vec<f64> = (1..s - 1).map(|i| libm::sin(2.0 * core::f64::consts::PI * i as f64 * dx)).collect();
    ComplexVector::from_real(&vals)
}

/// Forward Euler on the Burgers ODE from `sin(2πx)` with step `dt_ref`,
/// sampled every `sample_dt` up to `t_end`. Returns `(t, interior u)` pairs.
pub fn burgers_reference_explicit(
    s: usize,
    nu: f64,
    dt_ref: f64,
    t_end: f64,
    sample_dt: f64,
) -> Result<Vec<(f64, ComplexVector)>> {
    let ode = burgers_ode(s, nu)?;
    let u0 = burgers_initial_state(s)?;
    if !(dt_ref > 0.0 && t_end >= 0.0 && sample_dt >= dt_ref) {
        return Err(Error::invalid("need dt_ref > 0, t_end >= 0 and sample_dt >= dt_ref"));
    }
    let dx = 1.0 / (s - 1) as f64;
    if nu > 0.0 && dt_ref > dx * dx / (2.0 * nu) {
        return Err(Error::Stability(format!("dt_ref {dt_ref} exceeds the diffusive limit {}", dx * dx / (2.0 * nu))));
    }
    let steps = libm::round(t_end / dt_ref) as usize;
    let every = (libm::round(sample_dt / dt_ref) as usize).max(1);
    let norm0 = u0.max_abs();
    let mut u = u0;
    let mut out = vec![(0.0, u.clone())];
    for k in 1..=steps {
        let f = ode.rhs(&u)?;
        let next: Vec<Complex64> = u.iter().zip(f.iter()).map(|(a, b)| a + b * dt_ref).collect();
        u = ComplexVector::new(next).map_err(|_| Error::Stability(format!("non-finite state at step {k}")))?;
        if u.max_abs() > 10.0 * norm0.max(f64::MIN_POSITIVE) {
            return Err(Error::Stability(format!("norm grew more than tenfold by step {k}")));
        }
        if k % every == 0 || k == steps {
            out.push((k as f64 * dt_ref, u.clone()));
        }
    }
    Ok(out)
}
