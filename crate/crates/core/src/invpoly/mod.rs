//! Polynomial approximation of `1/x` and QSP phase factors realizing it.
//!
//! The target is `f(x) = (1 − (1 − x²)^b)/x`, which is within `ε` of `1/x` on
//! `[1/κ, 1]` for `b = ⌈κ² log(κ/ε)⌉`. Its Chebyshev series has only odd
//! orders, with binomial-tail coefficients, and is cut at order
//! `2D + 1`, `D = ⌈√(b log(4b/ε))⌉`.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

mod phases;
mod qsp;

pub use phases::{find_phases_wx, find_phases_wx_with, fit_symmetric_phases, PhaseFinderOptions};
pub use qsp::{
    convert_phases_reflection, operator_distance, qsp_unitary, Convention, PhaseSequence, Qsp2, SAFETY_SCALE,
};

/// Logarithm used in the degree formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogBase {
    #[default]
    Natural,
    Two,
    Ten,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => libm::log(x),
            LogBase::Two => libm::log2(x),
            LogBase::Ten => libm::log10(x),
        }
    }
}

/// `(b, d)` for the natural-log degree formulas; `d` is the odd polynomial degree.
pub fn degree_parameters(kappa: f64, epsilon: f64) -> Result<(u64, usize)> {
    degree_parameters_with(kappa, epsilon, LogBase::Natural)
}

pub fn degree_parameters_with(kappa: f64, epsilon: f64, base: LogBase) -> Result<(u64, usize)> {
    check_params(kappa, epsilon)?;
    let b = (kappa * kappa * base.log(kappa / epsilon)).ceil().max(1.0);
    let cut = (b * base.log(4.0 * b / epsilon)).sqrt().ceil().max(0.0);
    if !(b < 1e9) {
        return Err(Error::resource("inverse polynomial parameters are too large"));
    }
    Ok((b as u64, 2 * cut as usize + 1))
}

fn check_params(kappa: f64, epsilon: f64) -> Result<()> {
    if !(kappa > 1.0) || !kappa.is_finite() {
        return Err(Error::invalid("kappa must be a finite value above 1"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid("epsilon must lie in (0, 1)"));
    }
    Ok(())
}

/// `(1 − (1 − x²)^b)/x`, with value 0 at `x = 0`.
pub fn inverse_target_eval(x: f64, b: u64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    -libm::expm1(b as f64 * libm::log1p(-x * x)) / x
}

/// `max_{0<x≤1}` of [`inverse_target_eval`], by golden-section search in
/// `log x` (the target rises to a single peak near `1/√b`, then falls as `1/x`).
pub fn inverse_target_max(b: u64) -> f64 {
    let f = |t: f64| inverse_target_eval(libm::exp(t), b);
    let (mut lo, mut hi) = (-40.0f64, 0.0f64);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let a = hi - g * (hi - lo);
        let c = lo + g * (hi - lo);
        if f(a) > f(c) {
            hi = c;
        } else {
            lo = a;
        }
    }
    f(0.5 * (lo + hi)).max(f(0.0))
}

/// Chebyshev series of the inverse target, truncated at odd degree `degree`.
#[derive(Debug, Clone, PartialEq)]
pub struct InversePolynomial {
    pub kappa: f64,
    pub epsilon: f64,
    pub b: u64,
    pub degree: usize,
    /// Dense coefficients of `T_0 … T_degree`; even orders are zero.
    pub chebyshev_coeffs: Vec<f64>,
}

impl InversePolynomial {
    pub fn eval(&self, x: f64) -> f64 {
        evaluate_chebyshev(&self.chebyshev_coeffs, x)
    }

    /// Coefficient of `T_{2j+1}`.
    pub fn odd_coeff(&self, j: usize) -> f64 {
        self.chebyshev_coeffs.get(2 * j + 1).copied().unwrap_or(0.0)
    }

    /// `max |P|` over `[−1, 1]` from a dense grid refined by golden-section
    /// search around the best grid point.
    pub fn max_abs(&self) -> f64 {
        max_abs_odd(|x| self.eval(x), self.degree)
    }
}

pub(crate) fn max_abs_odd(f: impl Fn(f64) -> f64, degree: usize) -> f64 {
    let n = 40 * degree.max(4);
    let h = 1.0 / n as f64;
    let mut best = (0.0f64, 0.0f64);
    for i in 0..=n {
        let x = i as f64 * h;
        let v = f(x).abs();
        if v > best.1 {
            best = (x, v);
        }
    }
    let (mut lo, mut hi) = ((best.0 - h).max(0.0), (best.0 + h).min(1.0));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if f(a).abs() > f(b).abs() {
            hi = b;
        } else {
            lo = a;
        }
    }
    best.1.max(f(0.5 * (lo + hi)).abs())
}

pub fn chebyshev_inverse_coefficients(kappa: f64, epsilon: f64) -> Result<InversePolynomial> {
    let (b, degree) = degree_parameters(kappa, epsilon)?;
    Ok(InversePolynomial { kappa, epsilon, b, degree, chebyshev_coeffs: inverse_series(b, degree) })
}

/// Dense Chebyshev coefficients of the inverse target for a given `b`, cut at
/// `degree`: `c_{2j+1} = 4(−1)^j P(X ≥ b+j+1)`, `X ~ Bin(2b, ½)`.
pub fn inverse_series(b: u64, degree: usize) -> Vec<f64> {
    let tails = binomial_upper_tails(b);
    let mut coeffs = vec![0.0; degree + 1];
    let mut j = 0usize;
    while 2 * j + 1 <= degree && (j as u64) < b {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        coeffs[2 * j + 1] = 4.0 * sign * tails[j];
        j += 1;
    }
    coeffs
}

/// `tails[j] = P(X ≥ b + j + 1)` for `j = 0 … b−1`, `X ~ Bin(2b, ½)`.
fn binomial_upper_tails(b: u64) -> Vec<f64> {
    let n = 2 * b;
    let nf = n as f64;
    let bf = b as f64;
    let ln_pmf_b = libm::lgamma(nf + 1.0) - 2.0 * libm::lgamma(bf + 1.0) - nf * core::f64::consts::LN_2;
    // pmf(b + i) for i = 0..=b by the ratio recurrence.
    let mut pmf = Vec::with_capacity(b as usize + 1);
    let mut p = libm::exp(ln_pmf_b);
    pmf.push(p);
    for k in b..n {
        p *= (n - k) as f64 / (k + 1) as f64;
        pmf.push(p);
    }
    let mut tails = vec![0.0; b as usize];
    let mut acc = 0.0;
    for i in (1..=b as usize).rev() {
        acc += pmf[i];
        tails[i - 1] = acc;
    }
    tails
}

/// `Σ c_k T_k(x)` by the Clenshaw recurrence.
pub fn evaluate_chebyshev(coeffs: &[f64], x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = 2.0 * x * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    coeffs.first().copied().unwrap_or(0.0) + x * b1 - b2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_parameters_for_kappa_4() {
        let (b, d) = degree_parameters(4.0, 0.1).unwrap();
        assert_eq!(b, 60);
        let cut = (60.0 * libm::log(2400.0)).sqrt().ceil() as usize;
        assert_eq!(d, 2 * cut + 1);
        assert_eq!(d % 2, 1);
        let (b8, d8) = degree_parameters(8.0, 0.1).unwrap();
        assert!(b8 > b && d8 > d);
        assert!(degree_parameters(1.0, 0.1).is_err());
        assert!(degree_parameters(4.0, 1.0).is_err());
        let (_, d1) = degree_parameters(1.0001, 0.9).unwrap();
        assert!(d1 >= 1);
    }

    #[test]
    fn log_base_changes_b() {
        let (b2, _) = degree_parameters_with(4.0, 0.1, LogBase::Two).unwrap();
        assert_eq!(b2, (16.0 * libm::log2(40.0)).ceil() as u64);
    }

    #[test]
    fn target_values() {
        assert_eq!(inverse_target_eval(1.0, 7), 1.0);
        assert_eq!(inverse_target_eval(0.0, 7), 0.0);
        let f = inverse_target_eval(0.5, 10);
        let gap = libm::pow(0.75, 10.0) / 0.5;
        assert!(((2.0 - f) - gap).abs() < 1e-14);
        assert_eq!(inverse_target_eval(-0.3, 5), -inverse_target_eval(0.3, 5));
    }

    #[test]
    fn target_peak() {
        assert_eq!(inverse_target_max(1), 1.0);
        let b = 60;
        let grid = (1..=20000).map(|i| inverse_target_eval(i as f64 / 20000.0, b)).fold(0.0, f64::max);
        let peak = inverse_target_max(b);
        assert!(peak >= grid && peak - grid < 1e-6);
    }

    #[test]
    fn clenshaw_basics() {
        assert_eq!(evaluate_chebyshev(&[0.0, 1.0], 0.3), 0.3);
        assert!((evaluate_chebyshev(&[0.0, 0.0, 0.0, 1.0], 0.5) + 1.0).abs() < 1e-15);
        assert_eq!(evaluate_chebyshev(&[], 0.5), 0.0);
    }

    #[test]
    fn top_coefficient_is_single_tail_term() {
        let b = 5;
        let c = inverse_series(b, 2 * b as usize + 1);
        let j = (b - 1) as usize;
        let want = 4.0 * if j % 2 == 0 { 1.0 } else { -1.0 } * libm::pow(4.0, -(b as f64));
        assert!((c[2 * j + 1] - want).abs() < 1e-15);
    }

    #[test]
    fn small_b_series_is_exact() {
        // Untruncated, the series reproduces the target polynomial exactly.
        let b = 6;
        let c = inverse_series(b, 2 * b as usize);
        for i in 0..=20 {
            let x = -1.0 + 0.1 * i as f64;
            assert!((evaluate_chebyshev(&c, x) - inverse_target_eval(x, b)).abs() < 1e-13);
        }
    }
}
