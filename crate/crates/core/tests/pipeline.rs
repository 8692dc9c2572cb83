use qlsp_core::blockenc::{banded_spec_from_matrix, build_block_encoding, extract_block, pad_to_power_of_two};
use qlsp_core::numerics::{pseudoinverse_solve, singular_extrema, ComplexMatrix, ComplexVector};
use qlsp_core::pde::{
    burgers_initial_state, burgers_ode, burgers_reference_explicit, carleman_implicit_system, carleman_matrix,
    evolve_implicit, heat_evolve, heat_system, random_complex_tridiagonal, Backend, HeatConfig,
};
use qlsp_core::qsvt::{qsvt_block, solve_linear_system, svd_transform, PhaseMemo, PhaseSource, PreparedSolver, QsvtConfig, SolverOptions};
use qlsp_core::Complex64;

fn heat_adjoint() -> ComplexMatrix {
    let cfg = HeatConfig::new(0.01, 0.125, 1.0, 8);
    heat_system(&cfg, &cfg.initial).unwrap().0.adjoint()
}

#[test]
fn heat_adjoint_data_items() {
    let spec = banded_spec_from_matrix(&heat_adjoint()).unwrap();
    let mut vals: Vec<f64> = spec.active_items().map(|it| it.value.re).collect();
    vals.sort_by(f64::total_cmp);
    let want = [-1.28, -0.64, -0.64, 2.28];
    assert_eq!(vals.len(), 4);
    for (v, w) in vals.iter().zip(want) {
        assert!((v - w).abs() < 1e-12);
    }
    assert!((spec.alpha() - 4.84).abs() < 1e-12);
    let enc = build_block_encoding(&spec).unwrap();
    assert!(extract_block(&enc).unwrap().scaled_real(enc.alpha).max_abs_diff(&heat_adjoint()) <= 1e-10);
}

#[test]
fn burgers_adjoint_encoding() {
    let sys = carleman_matrix(&burgers_ode(7, 0.01).unwrap(), 2).unwrap();
    let (l, _) = carleman_implicit_system(&sys, &ComplexVector::zeros(30), 0.1).unwrap();
    let target = pad_to_power_of_two(&l.adjoint());
    let spec = banded_spec_from_matrix(&target).unwrap();
    assert!((spec.alpha() - 3.688).abs() < 1e-12);
    let enc = build_block_encoding(&spec).unwrap();
    assert!(extract_block(&enc).unwrap().scaled_real(enc.alpha).max_abs_diff(&target) <= 1e-10);
}

#[test]
fn heat_qsvt_block_matches_oracle() {
    let spec = banded_spec_from_matrix(&heat_adjoint()).unwrap();
    let enc = build_block_encoding(&spec).unwrap();
    let phases = PhaseMemo::new().phases(8.0, 0.1).unwrap();
    let block = qsvt_block(&QsvtConfig { encoding: enc.clone(), phases: phases.clone(), real_part: true }).unwrap();
    let abar = heat_adjoint().scaled_real(1.0 / enc.alpha);
    let oracle = svd_transform(&abar, phases.degree(), |x| phases.realized(x)).unwrap();
    assert!(block.max_abs_diff(&oracle) <= 1e-6);
}

#[test]
fn seeded_complex_system() {
    let (a, y) = random_complex_tridiagonal(3, 0).unwrap();
    let r = solve_linear_system(&a, &y, 0.1, None).unwrap();
    let x = pseudoinverse_solve(&a, &y).unwrap();
    assert!(r.solution.sub(&x).norm() <= 0.05 * x.norm());
    // Solve consistency on a well-conditioned input.
    let resid = a.mul_vec(&r.solution).unwrap().sub(&y).norm() / y.norm();
    assert!(resid <= 0.4);
}

#[test]
fn heat_trajectory_agrees_with_classical() {
    let cfg = HeatConfig::new(0.01, 0.125, 1.0, 8);
    let opts = SolverOptions::default().with_kappa(8.0);
    let memo = PhaseMemo::new();
    let q = heat_evolve(&cfg, 100, Backend::Qsvt { options: &opts, phases: &memo }).unwrap();
    let c = heat_evolve(&cfg, 100, Backend::Classical).unwrap();
    let dev = q.states.iter().zip(&c.states).map(|(a, b)| a.sub(b).max_abs()).fold(0.0, f64::max);
    assert!(dev <= 1e-2, "{dev}");
}

#[test]
fn burgers_qsvt_and_references() {
    let sys = carleman_matrix(&burgers_ode(7, 0.01).unwrap(), 2)
        .unwrap()
        .with_initial(&burgers_initial_state(7).unwrap())
        .unwrap();
    let (l, _) = carleman_implicit_system(&sys, &sys.y_in, 0.1).unwrap();
    let rhs = |y: &ComplexVector| Ok(carleman_implicit_system(&sys, y, 0.1)?.1);
    let opts = SolverOptions::default();
    let memo = PhaseMemo::new();
    let q = evolve_implicit(&l, sys.y_in.clone(), 3, Backend::Qsvt { options: &opts, phases: &memo }, rhs).unwrap();
    let c = evolve_implicit(&l, sys.y_in.clone(), 3, Backend::Classical, rhs).unwrap();
    let reference = burgers_reference_explicit(7, 0.01, 0.001, 0.3, 0.1).unwrap();
    let uq = sys.level_one(&q.states[3]);
    assert!(uq.sub(&sys.level_one(&c.states[3])).max_abs() <= 5e-2);
    assert!(uq.sub(&reference[3].1).max_abs() <= 0.15);
}

#[test]
fn kappa_8_phases_solve_a_better_conditioned_system() {
    // σ_min of the subnormalized matrix is above 1/4, yet κ = 8 phases are used.
    let diag: Vec<Complex64> = [1.0, 0.8, 0.6, 0.35].iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let a = ComplexMatrix::diagonal(&diag);
    let (_, smin) = singular_extrema(&a).unwrap();
    assert!(smin > 0.25);
    let opts = SolverOptions::default().with_kappa(8.0);
    let y = ComplexVector::from_real(&[0.5, -0.2, 0.3, 0.7]).unwrap();
    let r = PreparedSolver::new(&a, &opts, &PhaseMemo::new()).unwrap().solve(&y).unwrap();
    let x = pseudoinverse_solve(&a, &y).unwrap();
    assert_eq!(r.degree_used, 105);
    assert!(r.solution.sub(&x).norm() <= 0.05 * x.norm());
}
