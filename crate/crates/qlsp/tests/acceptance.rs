//! The ten acceptance criteria. Each prints one PASS/FAIL line; the test fails
//! if any criterion fails. Expected values come from oracles written here,
//! independent of the library code paths they check.

use std::f64::consts::PI;

use qlsp::cache::PhaseCache;
use qlsp::scaling::{extrapolate_report, run_scaling, Sweep};
use qlsp_core::blockenc::{banded_spec_from_matrix, build_block_encoding, extract_block, pad_to_power_of_two};
use qlsp_core::invpoly::{chebyshev_inverse_coefficients, find_phases_wx, Convention, SAFETY_SCALE};
use qlsp_core::numerics::svd;
use qlsp_core::pde::{
    burgers_ode, carleman_implicit_system, carleman_matrix, evolve_implicit, heat_explicit_evolve,
    random_complex_tridiagonal, Backend, HeatConfig,
};
use qlsp_core::qsvt::{qsvt_block, svd_transform, PhaseSource, PreparedSolver, QsvtConfig, SolverOptions};
use qlsp_core::statevector::{postselect, QuantumState, RegisterLayout};
use qlsp_core::{Complex64, ComplexMatrix, ComplexVector};

type C = Complex64;
type M2 = [[C; 2]; 2];

fn c(x: f64) -> C {
    C::new(x, 0.0)
}

struct Outcome {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn check(id: usize, name: &'static str, pass: bool, detail: String) -> Outcome {
    println!("{} criterion {id:>2} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    Outcome { id, name, pass, detail }
}

// ---- oracles -------------------------------------------------------------

/// Gaussian elimination with partial pivoting.
fn gauss_solve(a: &ComplexMatrix, b: &[C]) -> Vec<C> {
    let n = a.rows();
    let mut m: Vec<Vec<C>> = (0..n).map(|r| (0..n).map(|k| a[(r, k)]).chain([b[r]]).collect()).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].norm().total_cmp(&m[j][col].norm())).unwrap();
        m.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for k in col..=n {
                let v = m[col][k];
                m[r][k] -= f * v;
            }
        }
    }
    let mut x = vec![c(0.0); n];
    for r in (0..n).rev() {
        let s: C = (r + 1..n).map(|k| m[r][k] * x[k]).sum();
        x[r] = (m[r][n] - s) / m[r][r];
    }
    x
}

fn norm(v: &[C]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn diff_norm(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn diff_max(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn mul(a: &M2, b: &M2) -> M2 {
    let mut out = [[c(0.0); 2]; 2];
    for r in 0..2 {
        for k in 0..2 {
            out[r][k] = a[r][0] * b[0][k] + a[r][1] * b[1][k];
        }
    }
    out
}

fn rz(phi: f64) -> M2 {
    [[C::from_polar(1.0, phi), c(0.0)], [c(0.0), C::from_polar(1.0, -phi)]]
}

/// `e^{iφ₀Z} Π S(x) e^{iφ_kZ}` with the W_X or reflection signal.
fn qsp_product(reflection: bool, phases: &[f64], x: f64) -> M2 {
    let s = (1.0 - x * x).max(0.0).sqrt();
    let w = if reflection { [[c(x), c(s)], [c(s), c(-x)]] } else { [[c(x), C::new(0.0, s)], [C::new(0.0, s), c(x)]] };
    phases[1..].iter().fold(rz(phases[0]), |u, &p| mul(&mul(&u, &w), &rz(p)))
}

/// The scalar the QSVT circuit applies to a singular value `x` for reflection phases.
fn reflection_response(phases: &[f64], x: f64) -> f64 {
    let d = phases.len() - 1;
    let i_d = [c(1.0), C::new(0.0, 1.0), c(-1.0), C::new(0.0, -1.0)][d % 4];
    (qsp_product(true, phases, x)[0][0] * i_d).re
}

fn chebyshev_sum(coeffs: &[f64], x: f64) -> f64 {
    let t = x.clamp(-1.0, 1.0).acos();
    coeffs.iter().enumerate().map(|(k, &ck)| ck * (k as f64 * t).cos()).sum()
}

/// Heat matrix with the Dirichlet node eliminated and a ghost-point Neumann row.
fn heat_matrix_by_hand(lambda: f64, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |r, k| {
        if r == k {
            c(1.0 + 2.0 * lambda)
        } else if k + 1 == r {
            c(if r == n - 1 { -2.0 * lambda } else { -lambda })
        } else if k == r + 1 {
            c(-lambda)
        } else {
            c(0.0)
        }
    })
}

/// Explicit Euler on `u_t = ν u_xx − u u_x` with central differences and zero ends.
fn burgers_explicit_by_hand(s: usize, nu: f64, dt: f64, steps: usize) -> Vec<f64> {
    let dx = 1.0 / (s - 1) as f64;
    let mut u: Vec<f64> = (0..s).map(|i| (2.0 * PI * i as f64 * dx).sin()).collect();
    u[0] = 0.0;
    u[s - 1] = 0.0;
    for _ in 0..steps {
        let mut next = u.clone();
        for i in 1..s - 1 {
            let uxx = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (dx * dx);
            let ux = (u[i + 1] - u[i - 1]) / (2.0 * dx);
            next[i] = u[i] + dt * (nu * uxx - u[i] * ux);
        }
        u = next;
    }
    u[1..s - 1].to_vec()
}

struct SplitMix(u64);

impl SplitMix {
    fn next(&mut self) -> f64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    }
}

// ---- shared problem instances --------------------------------------------

fn complex_system() -> (ComplexMatrix, ComplexVector) {
    random_complex_tridiagonal(3, 0).unwrap()
}

fn heat_config() -> HeatConfig {
    HeatConfig::new(0.01, 0.125, 1.0, 8)
}

fn burgers_l() -> (qlsp_core::pde::CarlemanSystem, ComplexMatrix) {
    let sys = carleman_matrix(&burgers_ode(7, 0.01).unwrap(), 2)
        .unwrap()
        .with_initial(&qlsp_core::pde::burgers_initial_state(7).unwrap())
        .unwrap();
    let (l, _) = carleman_implicit_system(&sys, &sys.y_in, 0.1).unwrap();
    (sys, l)
}

/// The three adjoint targets: complex 8×8, heat 8×8, Burgers padded to 32×32.
fn targets() -> Vec<(&'static str, ComplexMatrix)> {
    let heat = heat_matrix_by_hand(0.64, 8);
    vec![
        ("complex", complex_system().0.adjoint()),
        ("heat", heat.adjoint()),
        ("burgers", pad_to_power_of_two(&burgers_l().1.adjoint())),
    ]
}

// ---- criteria ------------------------------------------------------------

fn c1_block_encoding() -> Outcome {
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for (name, target) in targets() {
        let spec = banded_spec_from_matrix(&target).unwrap();
        let enc = build_block_encoding(&spec).unwrap();
        let err = extract_block(&enc).unwrap().scaled_real(enc.alpha).max_abs_diff(&target);
        worst = worst.max(err);
        parts.push(format!("{name} {}x{} alpha={:.4} err={err:.2e}", target.rows(), target.cols(), enc.alpha));
    }
    check(1, "block encoding", worst <= 1e-10, format!("{} (tol 1e-10)", parts.join(", ")))
}

fn c2_inverse_bound() -> Outcome {
    let eps = 0.1;
    let mut parts = Vec::new();
    let mut pass = true;
    for kappa in [4.0, 8.0] {
        let poly = chebyshev_inverse_coefficients(kappa, eps).unwrap();
        let worst = (0..1000)
            .map(|i| {
                let x = 1.0 / kappa + (1.0 - 1.0 / kappa) * i as f64 / 999.0;
                (chebyshev_sum(&poly.chebyshev_coeffs, x) - 1.0 / x).abs()
            })
            .fold(0.0, f64::max);
        pass &= worst <= 2.0 * eps;
        parts.push(format!("kappa={kappa} d={} max|P-1/x|={worst:.4}", poly.degree));
    }
    check(2, "inverse polynomial bound", pass, format!("{} (tol {})", parts.join(", "), 2.0 * eps))
}

fn c3_phase_residual() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for (kappa, tol) in [(4.0, 1e-6), (8.0, 1e-5)] {
        let poly = chebyshev_inverse_coefficients(kappa, 0.1).unwrap();
        let seq = find_phases_wx(&poly).unwrap();
        let coeffs = &poly.chebyshev_coeffs;
        let peak = (0..=20000).map(|i| chebyshev_sum(coeffs, i as f64 / 20000.0).abs()).fold(0.0, f64::max);
        let scale = SAFETY_SCALE / peak;
        let nodes = seq.degree() + 1;
        let worst = (1..=nodes)
            .map(|j| {
                let x = ((2 * j - 1) as f64 * PI / (2 * nodes) as f64).cos();
                (qsp_product(false, seq.phases(), x)[0][0].re - scale * chebyshev_sum(coeffs, x)).abs()
            })
            .fold(0.0, f64::max);
        pass &= worst <= tol;
        parts.push(format!("kappa={kappa} residual={worst:.2e} (tol {tol:.0e})"));
    }
    check(3, "phase-finding residual", pass, parts.join(", "))
}

fn c4_conversion() -> Outcome {
    let cache = PhaseCache::in_memory();
    let mut worst = 0.0f64;
    for kappa in [4.0, 8.0] {
        let refl = cache.phases(kappa, 0.1).unwrap();
        let wx = find_phases_wx(&chebyshev_inverse_coefficients(kappa, 0.1).unwrap()).unwrap();
        assert_eq!(refl.convention(), Convention::Reflection);
        for i in 0..=400 {
            let x = -1.0 + i as f64 / 200.0;
            let a = qsp_product(true, refl.phases(), x);
            let b = qsp_product(false, wx.phases(), x);
            // Best global phase from the Frobenius overlap.
            let ov: C = (0..2).flat_map(|r| (0..2).map(move |k| (r, k))).map(|(r, k)| b[r][k].conj() * a[r][k]).sum();
            let g = ov / ov.norm();
            let d = (0..4).map(|i| (a[i / 2][i % 2] - g * b[i / 2][i % 2]).norm()).fold(0.0, f64::max);
            worst = worst.max(d);
        }
    }
    check(4, "convention conversion", worst <= 1e-10, format!("max operator distance {worst:.2e} over 401 points (tol 1e-10)"))
}

fn c5_qsvt_oracle() -> Outcome {
    let phases = PhaseCache::in_memory().phases(8.0, 0.1).unwrap();
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for (name, target) in targets() {
        let enc = build_block_encoding(&banded_spec_from_matrix(&target).unwrap()).unwrap();
        let abar = target.scaled_real(1.0 / enc.alpha);
        let block = qsvt_block(&QsvtConfig { encoding: enc, phases: phases.clone(), real_part: true }).unwrap();
        let oracle = svd_transform(&abar, phases.degree(), |x| reflection_response(phases.phases(), x)).unwrap();
        let err = block.max_abs_diff(&oracle);
        worst = worst.max(err);
        parts.push(format!("{name} err={err:.2e}"));
    }
    check(5, "QSVT oracle equivalence", worst <= 1e-5, format!("d={} {} (tol 1e-5)", phases.degree(), parts.join(", ")))
}

fn c6_complex() -> Outcome {
    let (a, y) = complex_system();
    let cache = PhaseCache::in_memory();
    let r = PreparedSolver::new(&a, &SolverOptions::default(), &cache).unwrap().solve(&y).unwrap();
    let x = gauss_solve(&a, y.as_slice());
    let rel = diff_norm(r.solution.as_slice(), &x) / norm(&x);
    check(
        6,
        "seeded complex system",
        rel <= 0.05,
        format!("seed=0 kappa={} d={} p={:.3} relative l2 error {rel:.2e} (tol 0.05)", r.kappa_used, r.degree_used, r.success_probability),
    )
}

fn c7_heat() -> Outcome {
    let cfg = heat_config();
    let a = heat_matrix_by_hand(cfg.lambda(), 8);
    let cache = PhaseCache::in_memory();
    let opts = SolverOptions::default().with_kappa(8.0);
    let q = qlsp_core::pde::heat_evolve(&cfg, 100, Backend::Qsvt { options: &opts, phases: &cache }).unwrap();
    let mut u = vec![c(0.0); 8];
    let mut dev = 0.0f64;
    for k in 1..=100 {
        let mut b = u.clone();
        b[0] += c(cfg.lambda());
        u = gauss_solve(&a, &b);
        dev = dev.max(diff_max(q.states[k].as_slice(), &u));
    }
    let threshold = 0.125f64 * 0.125 / (2.0 * 0.01);
    let explicit = heat_explicit_evolve(&cfg, 100).unwrap();
    let blowup = explicit.last().unwrap().max_abs();
    let diverges = cfg.dt > threshold && !(blowup <= 10.0);
    let pass = dev <= 1e-2 && (threshold - 0.78125).abs() < 1e-15 && diverges;
    check(
        7,
        "heat trajectory",
        pass,
        format!("max-abs deviation {dev:.2e} (tol 1e-2), explicit threshold {threshold}, explicit max|u| after 100 steps {blowup:.2e}"),
    )
}

fn c8_burgers() -> Outcome {
    let (sys, l) = burgers_l();
    let cache = PhaseCache::in_memory();
    let opts = SolverOptions::default();
    let rhs = |y: &ComplexVector| Ok(carleman_implicit_system(&sys, y, 0.1)?.1);
    let q = evolve_implicit(&l, sys.y_in.clone(), 3, Backend::Qsvt { options: &opts, phases: &cache }, rhs).unwrap();
    let mut y = sys.y_in.as_slice().to_vec();
    for _ in 0..3 {
        let (_, b) = carleman_implicit_system(&sys, &ComplexVector::new(y.clone()).unwrap(), 0.1).unwrap();
        y = gauss_solve(&l, b.as_slice());
    }
    let uq = &q.states[3].as_slice()[..5];
    let vs_classical = diff_max(uq, &y[..5]);
    let reference: Vec<C> = burgers_explicit_by_hand(7, 0.01, 1e-4, 3000).into_iter().map(c).collect();
    let vs_reference = diff_max(uq, &reference);
    let degrees: Vec<usize> = q.reports.iter().map(|r| r.degree_used).collect();
    check(
        8,
        "Burgers Carleman",
        vs_classical <= 5e-2 && vs_reference <= 0.15,
        format!(
            "vs classical {vs_classical:.2e} (tol 5e-2), vs explicit reference {vs_reference:.2e} (tol 0.15), degree used {:?}, reported degrees 117 and 559 kept as metadata",
            degrees
        ),
    )
}

fn c9_scaling() -> Outcome {
    let dts: Vec<f64> = (0..25).map(|i| (0.01f64.ln() + (4.0f64.ln() - 0.01f64.ln()) * i as f64 / 24.0).exp()).collect();
    let points: Vec<(usize, f64)> = dts.iter().map(|&d| (3, d)).collect();
    let recs = run_scaling(Sweep::Dt, &points, 0.01, 0.1, 4);
    let all_ok = recs.iter().all(|r| r.is_ok());
    let sigma_dec = recs.windows(2).all(|w| w[1].sigma_min < w[0].sigma_min);
    let deg_nondec = recs.windows(2).all(|w| w[1].degree >= w[0].degree);

    let qpoints: Vec<(usize, f64)> = [1.0, 2.0, 3.0].iter().flat_map(|&d| (3..=6).map(move |n| (n, d))).collect();
    let qrecs = run_scaling(Sweep::Qubits, &qpoints, 0.01, 0.1, 4);
    let mut errs = Vec::new();
    for dt in [1.0, 2.0, 3.0] {
        let e = extrapolate_report(&qrecs, dt, 7, 0.01, 0.1).unwrap();
        // Direct value from a fresh dense SVD of the 128-unknown system.
        let direct = {
            let a = heat_matrix_by_hand(0.01 * dt * 128.0 * 128.0, 128);
            let alpha = banded_spec_from_matrix(&a.adjoint()).unwrap().alpha();
            svd(&a).unwrap().singular_values.last().copied().unwrap() / alpha
        };
        errs.push((dt, (e.predicted_sigma_min - direct).abs() / direct));
    }
    let fit_ok = errs.iter().all(|&(_, e)| e <= 0.2);
    check(
        9,
        "scaling trends",
        all_ok && sigma_dec && deg_nondec && fit_ok,
        format!(
            "dt sweep of 25 points: sigma_min strictly decreasing={sigma_dec}, degree nondecreasing={deg_nondec}; n=7 prediction errors {} (tol 0.2)",
            errs.iter().map(|(d, e)| format!("dt={d}: {e:.2e}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn c10_properties() -> Outcome {
    let mut rng = SplitMix(2024);
    let mut svd_worst = 0.0f64;
    for i in 0..100 {
        let (r, k) = (1 + i % 9, 1 + (i * 7) % 9);
        let m = ComplexMatrix::from_fn(r, k, |_, _| C::new(rng.next(), rng.next()));
        let s = svd(&m).unwrap();
        let sig: Vec<C> = s.singular_values.iter().map(|&x| c(x)).collect();
        let mut sm = ComplexMatrix::zeros(s.left_vectors.cols(), s.right_vectors.cols());
        for (j, v) in sig.iter().enumerate() {
            sm[(j, j)] = *v;
        }
        let rec = s.left_vectors.matmul(&sm).matmul(&s.right_vectors.adjoint());
        svd_worst = svd_worst.max(rec.max_abs_diff(&m));
    }

    // Post-selection: probability equals the selected squared mass, and the kept
    // amplitudes are the originals rescaled by 1/√p.
    let layout = RegisterLayout::new(1, 2, 2).unwrap();
    let amps: Vec<C> = (0..layout.dim()).map(|_| C::new(rng.next(), rng.next())).collect();
    let nrm = norm(&amps);
    let amps: Vec<C> = amps.iter().map(|z| z / nrm).collect();
    let state = QuantumState::from_amplitudes(layout, ComplexVector::new(amps.clone()).unwrap()).unwrap();
    let (kept, p) = postselect(&state, &[0, 2], &[false, true]).unwrap();
    let selected = |i: usize| (i >> 4) & 1 == 0 && (i >> 2) & 1 == 1;
    let mass: f64 = (0..amps.len()).filter(|&i| selected(i)).map(|i| amps[i].norm_sqr()).sum();
    let post_err = (0..amps.len())
        .map(|i| {
            let want = if selected(i) { amps[i] / mass.sqrt() } else { c(0.0) };
            (kept.amplitudes().as_slice()[i] - want).norm()
        })
        .fold((p - mass).abs(), f64::max);

    // Odd transforms of a zero-padded matrix leave the padding untouched.
    let (a, _) = random_complex_tridiagonal(2, 7).unwrap();
    let small = a.submatrix(0, 0, 3, 3).scaled_real(0.25);
    let poly = chebyshev_inverse_coefficients(4.0, 0.1).unwrap();
    let f = |x: f64| chebyshev_sum(&poly.chebyshev_coeffs, x);
    let t_small = svd_transform(&small, poly.degree, f).unwrap();
    let t_pad = svd_transform(&small.padded(4, 4), poly.degree, f).unwrap();
    let mut pad_err = t_pad.submatrix(0, 0, 3, 3).max_abs_diff(&t_small);
    for i in 0..4 {
        pad_err = pad_err.max(t_pad[(3, i)].norm()).max(t_pad[(i, 3)].norm());
    }

    // κ = 8 phases on a matrix that κ = 4 would already cover.
    let cache = PhaseCache::in_memory();
    let d: Vec<C> = [1.0, 0.8, 0.6, 0.35].iter().map(|&x| c(x)).collect();
    let diag = ComplexMatrix::diagonal(&d);
    let y = ComplexVector::from_real(&[0.5, -0.2, 0.3, 0.7]).unwrap();
    let solver = PreparedSolver::new(&diag, &SolverOptions::default().with_kappa(8.0), &cache).unwrap();
    let sol = solver.solve(&y).unwrap();
    let exact: Vec<C> = y.iter().zip(&d).map(|(yi, di)| yi / di).collect();
    let reuse_err = diff_norm(sol.solution.as_slice(), &exact) / norm(&exact);
    let reused = cache.phases(8.0, 0.1).unwrap() == solver.config().phases;

    let pass = svd_worst <= 1e-10 && post_err <= 1e-15 && pad_err <= 1e-8 && reuse_err <= 0.05 && reused;
    check(
        10,
        "property suites",
        pass,
        format!(
            "svd reconstruction {svd_worst:.2e} over 100 matrices (tol 1e-10), post-selection {post_err:.1e}, padding {pad_err:.2e} (tol 1e-8), kappa=8 phases on sigma_min=0.35 matrix error {reuse_err:.2e} (tol 0.05), cached sequence reused={reused}"
        ),
    )
}

fn main() {
    let outcomes = vec![
        c1_block_encoding(),
        c2_inverse_bound(),
        c3_phase_residual(),
        c4_conversion(),
        c5_qsvt_oracle(),
        c6_complex(),
        c7_heat(),
        c8_burgers(),
        c9_scaling(),
        c10_properties(),
    ];
    let failed: Vec<String> =
        outcomes.iter().filter(|o| !o.pass).map(|o| format!("{} {}: {}", o.id, o.name, o.detail)).collect();
    println!("{}/{} criteria passed", outcomes.len() - failed.len(), outcomes.len());
    if !failed.is_empty() {
        eprintln!("failed criteria:\n{}", failed.join("\n"));
        std::process::exit(1);
    }
}
