use alloc::vec;
use alloc::vec::Vec;

use super::solve_real;
use crate::{Error, Result};

/// Fitted model `y = a·e^{−b·x} + c·e^{−d·x}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleExpFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub residual_rms: f64,
    /// Set when no start reached the convergence test within the iteration cap.
    pub degraded: bool,
}

impl DoubleExpFit {
    pub fn eval(&self, x: f64) -> f64 {
        model(&[self.a, self.b, self.c, self.d], x)
    }
}

const MAX_ITER: usize = 500;
const START_RATES: [f64; 6] = [0.0, 0.1, 0.3, 1.0, 3.0, 10.0];

fn model(p: &[f64; 4], x: f64) -> f64 {
    p[0] * (-p[1] * x).exp() + p[2] * (-p[3] * x).exp()
}

/// How residuals are weighted in the least-squares objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FitWeighting {
    Absolute,
    /// Residuals divided by the data value; suits data spanning decades.
    #[default]
    Relative,
}

fn weights(ys: &[f64], weighting: FitWeighting) -> Vec<f64> {
    match weighting {
        FitWeighting::Absolute => vec![1.0; ys.len()],
        FitWeighting::Relative => ys.iter().map(|y| 1.0 / y).collect(),
    }
}

fn cost(p: &[f64; 4], xs: &[f64], ys: &[f64], ws: &[f64]) -> f64 {
    xs.iter().zip(ys).zip(ws).map(|((&x, &y), &w)| (w * (model(p, x) - y)).powi(2)).sum()
}

/// Relative-residual fit; see [`fit_double_exponential_with`].
pub fn fit_double_exponential(xs: &[f64], ys: &[f64]) -> Result<DoubleExpFit> {
    fit_double_exponential_with(xs, ys, FitWeighting::Relative)
}

/// Least-squares fit of a double exponential by Levenberg-Marquardt from a
/// fixed grid of rate pairs; the best final residual wins, earlier starts
/// winning ties. `residual_rms` is in the weighted units.
pub fn fit_double_exponential_with(xs: &[f64], ys: &[f64], weighting: FitWeighting) -> Result<DoubleExpFit> {
    if xs.len() != ys.len() {
        return Err(Error::invalid("xs and ys differ in length"));
    }
    if xs.len() < 4 {
        return Err(Error::invalid("double-exponential fit needs at least 4 points"));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::invalid("fit data must be finite"));
    }
    if ys.iter().any(|&y| y <= 0.0) {
        return Err(Error::invalid("fit ordinates must be positive"));
    }
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let ws = weights(ys, weighting);

    let mut best: Option<([f64; 4], f64, bool)> = None;
    for (i, &rb) in START_RATES.iter().enumerate() {
        for &rd in &START_RATES[i + 1..] {
            let (b, d) = (rb / span, rd / span);
            let Some((a, c)) = linear_amplitudes(xs, ys, &ws, b, d) else { continue };
            let (p, f, converged) = levenberg_marquardt([a, b, c, d], xs, ys, &ws);
            let better = match &best {
                None => true,
                Some((_, bf, _)) => f < *bf,
            };
            if f.is_finite() && better {
                best = Some((p, f, converged));
            }
        }
    }
    let (p, f, converged) = best.ok_or_else(|| Error::Fit("no start produced a finite residual".into()))?;
    Ok(DoubleExpFit {
        a: p[0],
        b: p[1],
        c: p[2],
        d: p[3],
        residual_rms: (f / xs.len() as f64).sqrt(),
        degraded: !converged,
    })
}

/// Least-squares amplitudes for fixed rates.
fn linear_amplitudes(xs: &[f64], ys: &[f64], ws: &[f64], b: f64, d: f64) -> Option<(f64, f64)> {
    let (mut s11, mut s12, mut s22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for ((&x, &y), &w) in xs.iter().zip(ys).zip(ws) {
        let (e1, e2) = (w * (-b * x).exp(), w * (-d * x).exp());
        let y = w * y;
        s11 += e1 * e1;
        s12 += e1 * e2;
        s22 += e2 * e2;
        r1 += e1 * y;
        r2 += e2 * y;
    }
    match solve_real(&[s11, s12, s12, s22], &[r1, r2]) {
        Ok(v) => Some((v[0], v[1])),
        Err(_) => (s11 > 0.0).then(|| (r1 / s11, 0.0)),
    }
}

fn levenberg_marquardt(mut p: [f64; 4], xs: &[f64], ys: &[f64], ws: &[f64]) -> ([f64; 4], f64, bool) {
    let mut f = cost(&p, xs, ys, ws);
    let floor = 1e-30 * ys.iter().zip(ws).map(|(y, w)| (y * w).powi(2)).sum::<f64>();
    let mut mu = 1e-3;
    for _ in 0..MAX_ITER {
        if f <= floor {
            return (p, f, true);
        }
        let mut jtj = [0.0f64; 16];
        let mut jtr = [0.0f64; 4];
        for ((&x, &y), &w) in xs.iter().zip(ys).zip(ws) {
            let (e1, e2) = (w * (-p[1] * x).exp(), w * (-p[3] * x).exp());
            let r = p[0] * e1 + p[2] * e2 - w * y;
            let j = [e1, -p[0] * x * e1, e2, -p[2] * x * e2];
            for a in 0..4 {
                jtr[a] += j[a] * r;
                for b in 0..4 {
                    jtj[a * 4 + b] += j[a] * j[b];
                }
            }
        }
        let gnorm = jtr.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if gnorm <= 1e-15 * (1.0 + f.sqrt()) {
            return (p, f, true);
        }
        let mut accepted = false;
        while mu < 1e20 {
            let mut m = jtj;
            for a in 0..4 {
                m[a * 5] += mu * (jtj[a * 5] + 1e-12);
            }
            let rhs = [-jtr[0], -jtr[1], -jtr[2], -jtr[3]];
            if let Ok(step) = solve_real(&m, &rhs) {
                let trial = [p[0] + step[0], p[1] + step[1], p[2] + step[2], p[3] + step[3]];
                let ft = cost(&trial, xs, ys, ws);
                if ft.is_finite() && ft < f {
                    let step_norm = step.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    let p_norm = p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    let small = step_norm <= 1e-14 * (p_norm + 1e-14) || f - ft <= 1e-16 * f;
                    p = trial;
                    f = ft;
                    mu = (mu / 3.0).max(1e-15);
                    accepted = true;
                    if small {
                        return (p, f, true);
                    }
                    break;
                }
            }
            mu *= 4.0;
        }
        if !accepted {
            // No descent direction left at any damping: a stationary point.
            return (p, f, true);
        }
    }
    (p, f, false)
}
