use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;

use super::qsp::{mul2, phase2, signal, Convention, PhaseSequence, Qsp2, SAFETY_SCALE};
use super::InversePolynomial;
use crate::numerics::{solve_real, ONE, ZERO};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseFinderOptions {
    /// Fraction of `max |P|` used as the target amplitude.
    pub safety: f64,
    pub max_iterations: usize,
    /// Largest accepted node residual.
    pub tolerance: f64,
}

impl Default for PhaseFinderOptions {
    fn default() -> Self {
        Self { safety: SAFETY_SCALE, max_iterations: 100, tolerance: 1e-6 }
    }
}

/// Symmetric W_X phases for `0.9·P/max|P|`, with `β` the realized value at `x = 1`.
pub fn find_phases_wx(poly: &InversePolynomial) -> Result<PhaseSequence> {
    find_phases_wx_with(poly, &PhaseFinderOptions::default())
}

pub fn find_phases_wx_with(poly: &InversePolynomial, opts: &PhaseFinderOptions) -> Result<PhaseSequence> {
    let peak = poly.max_abs();
    if !(peak > 0.0) {
        return Err(Error::invalid("target polynomial vanishes"));
    }
    let scale = opts.safety / peak;
    let phases = fit_symmetric_phases(|x| scale * poly.eval(x), poly.degree, opts)?;
    let seq = PhaseSequence::new(Convention::WX, phases, 1.0)?;
    let beta = seq.realized(1.0);
    Ok(PhaseSequence::new(Convention::WX, seq.phases().to_vec(), beta)?.with_source(poly.kappa, poly.epsilon))
}

/// Positive Chebyshev nodes `cos((2j−1)π/(4m))`, `j = 1 … m`.
pub(crate) fn positive_nodes(m: usize) -> Vec<f64> {
    (1..=m).map(|j| libm::cos((2 * j - 1) as f64 * PI / (4 * m) as f64)).collect()
}

fn expand(theta: &[f64], d: usize) -> Vec<f64> {
    (0..=d).map(|k| theta[k.min(d - k)]).collect()
}

/// Newton iteration on the symmetric reduced phases so that
/// `Re⟨0|U_{W_X}(φ, x)|0⟩` matches `target` on the positive Chebyshev nodes.
/// `target` must have the parity of `degree` and stay below 1 in modulus.
pub fn fit_symmetric_phases(target: impl Fn(f64) -> f64, degree: usize, opts: &PhaseFinderOptions) -> Result<Vec<f64>> {
    let d = degree;
    let m = d / 2 + 1;
    let nodes = positive_nodes(m);
    let goal: Vec<f64> = nodes.iter().map(|&x| target(x)).collect();
    let mut theta = vec![0.0; m];
    theta[0] = if d == 0 { 0.0 } else { FRAC_PI_4 };

    let residual = |theta: &[f64]| -> Vec<f64> {
        let phi = expand(theta, d);
        nodes.iter().zip(&goal).map(|(&x, &g)| forward(&phi, x)[0][0].re - g).collect()
    };
    let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));

    let mut f = residual(&theta);
    let mut err = max_abs(&f);
    for _ in 0..opts.max_iterations {
        if err <= 1e-14 {
            break;
        }
        let jac = jacobian(&theta, d, &nodes);
        let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
        let Ok(step) = solve_real(&jac, &rhs) else { break };
        let mut t = 1.0;
        let mut improved = false;
        while t > 1e-6 {
            let trial: Vec<f64> = theta.iter().zip(&step).map(|(a, s)| a + t * s).collect();
            let ft = residual(&trial);
            let et = max_abs(&ft);
            if et < err {
                theta = trial;
                f = ft;
                err = et;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    if !(err <= opts.tolerance) {
        return Err(Error::NonConvergence { residual: err });
    }
    Ok(expand(&theta, d))
}

fn forward(phi: &[f64], x: f64) -> Qsp2 {
    super::qsp::qsp_unitary(Convention::WX, phi, x)
}

/// Row-major `m x m` Jacobian of the node residuals in the reduced phases.
fn jacobian(theta: &[f64], d: usize, nodes: &[f64]) -> Vec<f64> {
    let m = theta.len();
    let phi = expand(theta, d);
    let mut jac = vec![0.0; m * m];
    let id: Qsp2 = [[ONE, ZERO], [ZERO, ONE]];
    let mut left = vec![id; d + 1];
    let mut right = vec![id; d + 1];
    for (row, &x) in nodes.iter().enumerate() {
        let w = signal(Convention::WX, x);
        // left[k]: product of the factors before e^{iφ_k Z}.
        for k in 1..=d {
            left[k] = mul2(&mul2(&left[k - 1], &phase2(phi[k - 1])), &w);
        }
        // right[k]: product of the factors after e^{iφ_k Z}.
        right[d] = id;
        for k in (0..d).rev() {
            right[k] = mul2(&mul2(&w, &phase2(phi[k + 1])), &right[k + 1]);
        }
        for k in 0..=d {
            let e = Complex64::from_polar(1.0, phi[k]);
            let i = Complex64::new(0.0, 1.0);
            let dz = left[k][0][0] * i * e * right[k][0][0] - left[k][0][1] * i * e.conj() * right[k][1][0];
            jac[row * m + k.min(d - k)] += dz.re;
        }
    }
    jac
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invpoly::chebyshev_inverse_coefficients;

    #[test]
    fn identity_polynomial_gives_zero_phases() {
        let phases = fit_symmetric_phases(|x| x, 1, &PhaseFinderOptions::default()).unwrap();
        // The residual is quadratic in the phase near zero, so the phase
        // itself is only pinned to about the square root of the tolerance.
        assert!(phases.iter().all(|p| p.abs() < 1e-6), "{phases:?}");
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let d = 5;
        let theta = [0.3, -0.2, 0.5];
        let nodes = positive_nodes(3);
        let jac = jacobian(&theta, d, &nodes);
        let h = 1e-6;
        for p in 0..3 {
            let mut tp = theta;
            let mut tm = theta;
            tp[p] += h;
            tm[p] -= h;
            for (r, &x) in nodes.iter().enumerate() {
                let fd = (forward(&expand(&tp, d), x)[0][0].re - forward(&expand(&tm, d), x)[0][0].re) / (2.0 * h);
                assert!((fd - jac[r * 3 + p]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn kappa_4_phases_fit_nodes() {
        let poly = chebyshev_inverse_coefficients(4.0, 0.1).unwrap();
        let seq = find_phases_wx(&poly).unwrap();
        assert_eq!(seq.degree(), poly.degree);
        let scale = SAFETY_SCALE / poly.max_abs();
        for x in positive_nodes(poly.degree / 2 + 1) {
            assert!((seq.realized(x) - scale * poly.eval(x)).abs() <= 1e-6);
        }
        for i in 0..50 {
            let x = i as f64 / 50.0;
            assert!((seq.realized(-x) + seq.realized(x)).abs() < 1e-10);
        }
        assert!(seq.beta() > 0.0 && seq.beta() <= 1.0);
    }
}
