//! Problem builders: implicit heat steps, Carleman lifts of quadratic ODEs
//! with the Burgers instance, and the seeded complex tridiagonal system.

use alloc::boxed::Box;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::numerics::{pseudoinverse_solve, ComplexMatrix, ComplexVector};
use crate::qsvt::{PhaseSource, PreparedSolver, SolveReport, SolverOptions};
use crate::{Error, Result};

mod carleman;
mod random;

pub use carleman::{
    burgers_initial_state, burgers_ode, burgers_reference_explicit, carleman_implicit_system,
    carleman_initial_state, carleman_matrix, CarlemanSystem, QuadraticODE, MAX_CARLEMAN_DIMENSION,
};
pub use random::{random_complex_tridiagonal, random_complex_tridiagonal_with};

/// 1D heat equation on `[0, L]` with `u(0) = D` and `∂u/∂x(L) = N_B`.
/// Unknowns are the grid points `1 … N`; the Dirichlet point is eliminated.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatConfig {
    pub nu: f64,
    pub dx: f64,
    pub dt: f64,
    pub dirichlet_left: f64,
    pub neumann_right: f64,
    pub unknowns: usize,
    pub initial: ComplexVector,
}

impl HeatConfig {
    /// Zero initial state with `u(0) = 1` and an insulated right end.
    pub fn new(nu: f64, dx: f64, dt: f64, unknowns: usize) -> Self {
        Self {
            nu,
            dx,
            dt,
            dirichlet_left: 1.0,
            neumann_right: 0.0,
            unknowns,
            initial: ComplexVector::zeros(unknowns),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.dx > 0.0 && self.dt >= 0.0) {
            return Err(Error::invalid("heat parameters need nu > 0, dx > 0, dt >= 0"));
        }
        if !self.lambda().is_finite() || !self.dirichlet_left.is_finite() || !self.neumann_right.is_finite() {
            return Err(Error::invalid("heat parameters must be finite"));
        }
        if self.unknowns < 2 {
            return Err(Error::invalid("heat grid needs at least two unknowns"));
        }
        if self.initial.dim() != self.unknowns {
            return Err(Error::invalid("initial state length differs from the unknown count"));
        }
        Ok(())
    }

    /// `λ = ν Δt / Δx²`.
    pub fn lambda(&self) -> f64 {
        self.nu * self.dt / (self.dx * self.dx)
    }
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Implicit step `A u^{n+1} = b`.
pub fn heat_system(config: &HeatConfig, u_n: &ComplexVector) -> Result<(ComplexMatrix, ComplexVector)> {
    config.validate()?;
    let n = config.unknowns;
    if u_n.dim() != n {
        return Err(Error::invalid("state length differs from the unknown count"));
    }
    let l = config.lambda();
    let mut a = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = c(1.0 + 2.0 * l);
        if i + 1 < n {
            a[(i, i + 1)] = c(-l);
        }
        if i > 0 {
            a[(i, i - 1)] = c(if i == n - 1 { -2.0 * l } else { -l });
        }
    }
    let mut b = u_n.clone();
    b[0] += c(l * config.dirichlet_left);
    b[n - 1] += c(2.0 * l * config.neumann_right * config.dx);
    Ok((a, b))
}

/// Forward-Euler step with the same boundary handling as [`heat_system`].
pub fn heat_explicit_step(config: &HeatConfig, u_n: &ComplexVector) -> Result<ComplexVector> {
    config.validate()?;
    let n = config.unknowns;
    if u_n.dim() != n {
        return Err(Error::invalid("state length differs from the unknown count"));
    }
    let l = config.lambda();
    let u = u_n.as_slice();
    let mut out = ComplexVector::zeros(n);
    for i in 0..n {
        let left = if i == 0 { c(config.dirichlet_left) } else { u[i - 1] };
        // Ghost point u_{N+1} = u_{N−1} + 2Δx·N_B.
        let right = if i == n - 1 { u[n - 2] + c(2.0 * config.dx * config.neumann_right) } else { u[i + 1] };
        out[i] = left * l + u[i] * (1.0 - 2.0 * l) + right * l;
    }
    Ok(out)
}

/// Largest explicit time step, `Δx²/(2ν)`.
pub fn heat_stability_threshold(config: &HeatConfig) -> f64 {
    config.dx * config.dx / (2.0 * config.nu)
}

/// Linear solver used for each implicit step.
#[derive(Clone, Copy)]
pub enum Backend<'a> {
    /// Dense pseudoinverse.
    Classical,
    Qsvt { options: &'a SolverOptions, phases: &'a dyn PhaseSource },
}

impl core::fmt::Debug for Backend<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Backend::Classical => f.write_str("Classical"),
            Backend::Qsvt { options, .. } => f.debug_struct("Qsvt").field("options", options).finish_non_exhaustive(),
        }
    }
}

/// States `u⁰ … u^steps`, plus the QSVT reports when that backend ran.
#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    pub states: Vec<ComplexVector>,
    pub reports: Vec<SolveReport>,
}

/// One fixed matrix `A`, solved against a new right-hand side each step.
#[derive(Debug)]
pub struct ImplicitStepper {
    a: ComplexMatrix,
    solver: Option<PreparedSolver>,
}

impl ImplicitStepper {
    pub fn new(a: &ComplexMatrix, backend: Backend<'_>) -> Result<Self> {
        let solver = match backend {
            Backend::Classical => None,
            Backend::Qsvt { options, phases } => Some(PreparedSolver::new(a, options, phases)?),
        };
        Ok(Self { a: a.clone(), solver })
    }

    pub fn solver(&self) -> Option<&PreparedSolver> {
        self.solver.as_ref()
    }

    /// Solution of `A x = b`, with the QSVT report when that backend runs.
    pub fn step(&self, b: &ComplexVector) -> Result<(ComplexVector, Option<SolveReport>)> {
        match &self.solver {
            None => Ok((pseudoinverse_solve(&self.a, b)?, None)),
            Some(s) => {
                let r = s.solve(b)?;
                Ok((r.solution.clone(), Some(r)))
            }
        }
    }
}

/// Repeated solves of `A x^{k+1} = rhs(x^k)` with a fixed `A`.
pub fn evolve_implicit(
    a: &ComplexMatrix,
    initial: ComplexVector,
    steps: usize,
    backend: Backend<'_>,
    mut rhs: impl FnMut(&ComplexVector) -> Result<ComplexVector>,
) -> Result<Evolution> {
    let at = |step: usize| move |e: Error| Error::AtStep { step, source: Box::new(e) };
    let mut states = Vec::with_capacity(steps + 1);
    let mut reports = Vec::new();
    states.push(initial);
    if steps == 0 {
        return Ok(Evolution { states, reports });
    }
    let stepper = ImplicitStepper::new(a, backend).map_err(at(1))?;
    for step in 1..=steps {
        let b = rhs(states.last().expect("nonempty")).map_err(at(step))?;
        let (next, report) = stepper.step(&b).map_err(at(step))?;
        reports.extend(report);
        states.push(next);
    }
    Ok(Evolution { states, reports })
}

/// `steps` implicit heat steps from `config.initial`.
pub fn heat_evolve(config: &HeatConfig, steps: usize, backend: Backend<'_>) -> Result<Evolution> {
    let (a, _) = heat_system(config, &config.initial)?;
    evolve_implicit(&a, config.initial.clone(), steps, backend, |u| Ok(heat_system(config, u)?.1))
}

/// `steps` forward-Euler heat steps from `config.initial`.
pub fn heat_explicit_evolve(config: &HeatConfig, steps: usize) -> Result<Vec<ComplexVector>> {
    let mut out = Vec::with_capacity(steps + 1);
    out.push(config.initial.clone());
    for _ in 0..steps {
        let next = heat_explicit_step(config, out.last().expect("nonempty"))?;
        out.push(next);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsvt::PhaseMemo;

    fn reference_config() -> HeatConfig {
        HeatConfig::new(0.01, 0.125, 1.0, 8)
    }

    #[test]
    fn reference_heat_matrix() {
        let cfg = reference_config();
        assert!((cfg.lambda() - 0.64).abs() < 1e-15);
        let (a, b) = heat_system(&cfg, &cfg.initial).unwrap();
        assert!((a[(3, 3)].re - 2.28).abs() < 1e-14);
        assert!((a[(3, 4)].re + 0.64).abs() < 1e-14);
        assert!((a[(3, 2)].re + 0.64).abs() < 1e-14);
        assert!((a[(7, 6)].re + 1.28).abs() < 1e-14);
        assert_eq!(a[(0, 2)], c(0.0));
        assert!((b[0].re - 0.64).abs() < 1e-15);
        assert!(b.iter().skip(1).all(|z| *z == c(0.0)));
    }

    #[test]
    fn zero_step_heat_is_identity() {
        let mut cfg = reference_config();
        cfg.dt = 0.0;
        cfg.initial = ComplexVector::from_real(&[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8]).unwrap();
        let (a, b) = heat_system(&cfg, &cfg.initial).unwrap();
        assert_eq!(a.max_abs_diff(&ComplexMatrix::identity(8)), 0.0);
        assert_eq!(b, cfg.initial);
    }

    #[test]
    fn explicit_step_values() {
        let cfg = reference_config();
        let u1 = heat_explicit_step(&cfg, &cfg.initial).unwrap();
        assert!((u1[0].re - 0.64).abs() < 1e-15);
        assert!(u1.iter().skip(1).all(|z| z.norm() == 0.0));

        let mut flat = reference_config();
        flat.dirichlet_left = 0.7;
        flat.initial = ComplexVector::from_real(&[0.7; 8]).unwrap();
        let u = heat_explicit_step(&flat, &flat.initial).unwrap();
        assert!(u.sub(&flat.initial).max_abs() < 1e-15);
    }

    #[test]
    fn explicit_diverges_above_threshold() {
        let cfg = reference_config();
        assert!((heat_stability_threshold(&cfg) - 0.78125).abs() < 1e-15);
        assert!(cfg.dt > heat_stability_threshold(&cfg));
        let bad = heat_explicit_evolve(&cfg, 100).unwrap();
        assert!(bad.last().unwrap().max_abs() > 1e3);
        let mut ok = reference_config();
        ok.dt = 0.2 * 0.125 * 0.125 / 0.01;
        let good = heat_explicit_evolve(&ok, 100).unwrap();
        assert!(good.iter().all(|u| u.max_abs() <= 1.0 + 1e-12));
        let mut wide = reference_config();
        wide.dx *= 2.0;
        assert!((heat_stability_threshold(&wide) - 4.0 * 0.78125).abs() < 1e-12);
    }

    #[test]
    fn classical_heat_rises_monotonically() {
        let ev = heat_evolve(&reference_config(), 100, Backend::Classical).unwrap();
        assert_eq!(ev.states.len(), 101);
        for w in ev.states.windows(2) {
            for i in 0..8 {
                assert!(w[1][i].re >= w[0][i].re - 1e-12 && w[1][i].re <= 1.0 + 1e-12);
            }
        }
        assert_eq!(heat_evolve(&reference_config(), 0, Backend::Classical).unwrap().states.len(), 1);
    }

    #[test]
    fn implicit_and_explicit_agree_for_small_lambda() {
        let mut cfg = reference_config();
        cfg.dt = 0.1 * 0.125 * 0.125 / 0.01;
        let xs: Vec<f64> = (1..=8).map(|i| libm::cos(0.3 * i as f64)).collect();
        cfg.dirichlet_left = 1.0;
        cfg.initial = ComplexVector::from_real(&xs).unwrap();
        let l = cfg.lambda();
        let imp = heat_evolve(&cfg, 1, Backend::Classical).unwrap().states.pop().unwrap();
        let exp = heat_explicit_step(&cfg, &cfg.initial).unwrap();
        assert!(imp.sub(&exp).max_abs() <= 10.0 * l * l);
    }

    #[test]
    fn one_qsvt_heat_step() {
        let cfg = reference_config();
        let opts = SolverOptions::default();
        let memo = PhaseMemo::new();
        let q = heat_evolve(&cfg, 1, Backend::Qsvt { options: &opts, phases: &memo }).unwrap();
        let cl = heat_evolve(&cfg, 1, Backend::Classical).unwrap();
        assert_eq!(q.reports[0].kappa_used, 8.0);
        assert!(q.states[1].sub(&cl.states[1]).max_abs() <= 1e-2);
    }

    #[test]
    fn backend_errors_carry_the_step() {
        let cfg = reference_config();
        let opts = SolverOptions { kappa_ladder: alloc::vec![2.0], ..SolverOptions::default() };
        let memo = PhaseMemo::new();
        let err = heat_evolve(&cfg, 3, Backend::Qsvt { options: &opts, phases: &memo }).unwrap_err();
        assert!(matches!(err, Error::AtStep { step: 1, .. }));
        assert!(matches!(err.root(), Error::Conditioning { .. }));
    }
}
