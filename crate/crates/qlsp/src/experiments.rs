//! Experiment drivers. Each writes its CSV files under the output directory
//! and returns a short summary for the terminal.

use std::path::{Path, PathBuf};
use std::time::Instant;

use qlsp_core::numerics::pseudoinverse_solve;
use qlsp_core::pde::{
    burgers_initial_state, burgers_ode, burgers_reference_explicit, carleman_implicit_system, carleman_matrix,
    heat_explicit_evolve, heat_stability_threshold, heat_system, random_complex_tridiagonal, Backend, HeatConfig,
    ImplicitStepper,
};
use qlsp_core::qsvt::{PhaseSource, PreparedSolver, SolveReport, SolverOptions};
use qlsp_core::{Complex64, ComplexVector};

use crate::cache::PhaseCache;
use crate::config::{Experiment, ExperimentConfig};
use crate::error::{CliError, Result};
use crate::formats::{fmt_f64, CsvOut};
use crate::scaling::{extrapolate_report, run_scaling, write_scaling_csv, Sweep};

/// Files written and `key: value` lines worth printing.
#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
    pub summary: Vec<(String, String)>,
}

impl RunOutput {
    fn note(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.to_string(), value.to_string()));
    }
}

/// Externally reported Burgers degrees, written as metadata only.
pub const REPORTED_BURGERS_DEGREES: &str = "117,559";

struct Clock {
    on: bool,
}

impl Clock {
    fn time<T>(&self, f: impl FnOnce() -> T) -> (T, f64) {
        let start = Instant::now();
        let out = f();
        (out, if self.on { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 })
    }
}

pub fn phase_source(cfg: &ExperimentConfig) -> Result<PhaseCache> {
    match &cfg.phase_cache {
        Some(dir) => PhaseCache::with_dir(dir).map_err(CliError::io(dir)),
        None => Ok(PhaseCache::in_memory()),
    }
}

fn solver_options(cfg: &ExperimentConfig) -> SolverOptions {
    SolverOptions { epsilon: cfg.epsilon, kappa: cfg.kappa, ..SolverOptions::default() }
}

/// Runs the configured experiment, writing into `cfg.out`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    std::fs::create_dir_all(&cfg.out).map_err(CliError::io(&cfg.out))?;
    let mut out = RunOutput::default();
    out.note("experiment", cfg.experiment.name());
    match cfg.experiment {
        Experiment::Complex => run_complex(cfg, &phase_source(cfg)?, &mut out)?,
        Experiment::Heat => run_heat(cfg, &phase_source(cfg)?, &mut out)?,
        Experiment::Burgers => run_burgers(cfg, &phase_source(cfg)?, &mut out)?,
        Experiment::ScalingDt => run_scaling_dt(cfg, &mut out)?,
        Experiment::ScalingQubits => run_scaling_qubits(cfg, &mut out)?,
    }
    Ok(out)
}

const SUMMARY_HEADER: [&str; 9] =
    ["matrix_id", "dim", "alpha", "sigma_min", "kappa", "degree", "success_probability", "residual", "wall_time_ms"];

fn common_meta(cfg: &ExperimentConfig) -> Vec<(&'static str, String)> {
    let mut m = vec![("experiment", cfg.experiment.name().to_string()), ("epsilon", cfg.epsilon.to_string())];
    if let Some(k) = cfg.kappa {
        m.push(("kappa_override", k.to_string()));
    }
    m
}

fn run_complex(cfg: &ExperimentConfig, source: &dyn PhaseSource, out: &mut RunOutput) -> Result<()> {
    let seed = cfg.seed.ok_or_else(|| CliError::config("the complex experiment needs --seed"))?;
    let n_qubits = cfg.qubits[0];
    let clock = Clock { on: cfg.timing };
    let (a, y) = random_complex_tridiagonal(n_qubits, seed)?;
    let opts = solver_options(cfg);
    let (report, wall) = clock.time(|| PreparedSolver::new(&a, &opts, source)?.solve(&y));
    let report = report?;
    let exact = pseudoinverse_solve(&a, &y)?;
    let residual = a.mul_vec(&report.solution)?.sub(&y).norm() / y.norm();
    let rel_err = report.solution.sub(&exact).norm() / exact.norm();

    let mut meta = common_meta(cfg);
    meta.extend([("seed", seed.to_string()), ("n_qubits", n_qubits.to_string())]);
    let parity_path = cfg.out.join("parity.csv");
    let mut parity = CsvOut::create(
        &parity_path,
        &meta,
        &["index", "true_re", "true_im", "qsvt_re", "qsvt_im", "wall_time_ms"],
    )?;
    for (i, (t, q)) in exact.iter().zip(report.solution.iter()).enumerate() {
        parity.row([i.to_string(), fmt_f64(t.re), fmt_f64(t.im), fmt_f64(q.re), fmt_f64(q.im), fmt_f64(wall)])?;
    }
    parity.finish()?;

    let summary_path = cfg.out.join("summary.csv");
    meta.push(("relative_error", fmt_f64(rel_err)));
    let mut summary = CsvOut::create(&summary_path, &meta, &SUMMARY_HEADER)?;
    summary.row(summary_row(&format!("tridiag_n{n_qubits}_seed{seed}"), a.rows(), &report, residual, wall))?;
    summary.finish()?;

    out.files.extend([parity_path, summary_path]);
    out.note("kappa", report.kappa_used);
    out.note("degree", report.degree_used);
    out.note("success_probability", fmt_f64(report.success_probability));
    out.note("relative_error", fmt_f64(rel_err));
    out.note("residual", fmt_f64(residual));
    Ok(())
}

fn summary_row(id: &str, dim: usize, r: &SolveReport, residual: f64, wall: f64) -> [String; 9] {
    [
        id.to_string(),
        dim.to_string(),
        fmt_f64(r.alpha),
        fmt_f64(r.sigma_min),
        fmt_f64(r.kappa_used),
        r.degree_used.to_string(),
        fmt_f64(r.success_probability),
        fmt_f64(residual),
        fmt_f64(wall),
    ]
}

const TRAJECTORY_HEADER: [&str; 5] = ["time", "grid_index", "value_re", "value_im", "wall_time_ms"];

/// One row per grid value per time; `walls[k]` is the time spent on step `k`.
fn write_trajectory(
    path: &Path,
    meta: &[(&str, String)],
    dt: f64,
    states: &[Vec<Complex64>],
    walls: &[f64],
) -> Result<()> {
    let mut csv = CsvOut::create(path, meta, &TRAJECTORY_HEADER)?;
    for (k, state) in states.iter().enumerate() {
        for (i, v) in state.iter().enumerate() {
            csv.row([fmt_f64(k as f64 * dt), i.to_string(), fmt_f64(v.re), fmt_f64(v.im), fmt_f64(walls[k])])?;
        }
    }
    csv.finish()
}

struct Stepped {
    states: Vec<ComplexVector>,
    reports: Vec<SolveReport>,
    walls: Vec<f64>,
}

/// `steps` solves of `A x^{k+1} = rhs(x^k)`; the first wall time covers setup.
fn step_timed(
    a: &qlsp_core::ComplexMatrix,
    initial: ComplexVector,
    steps: usize,
    backend: Backend<'_>,
    clock: &Clock,
    rhs: impl Fn(&ComplexVector) -> qlsp_core::Result<ComplexVector>,
) -> Result<Stepped> {
    let at = |step: usize| move |e: qlsp_core::Error| qlsp_core::Error::AtStep { step, source: Box::new(e) };
    let (stepper, setup) = clock.time(|| ImplicitStepper::new(a, backend));
    let stepper = stepper.map_err(at(1))?;
    let mut run = Stepped { states: vec![initial], reports: Vec::new(), walls: vec![0.0] };
    for step in 1..=steps {
        let (res, mut wall) = clock.time(|| {
            let b = rhs(run.states.last().expect("nonempty"))?;
            stepper.step(&b)
        });
        let (x, report) = res.map_err(at(step))?;
        if step == 1 {
            wall += setup;
        }
        run.states.push(x);
        run.reports.extend(report);
        run.walls.push(wall);
    }
    Ok(run)
}

fn max_deviation(a: &[ComplexVector], b: &[ComplexVector]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.sub(y).max_abs()).fold(0.0, f64::max)
}

fn run_heat(cfg: &ExperimentConfig, source: &dyn PhaseSource, out: &mut RunOutput) -> Result<()> {
    let clock = Clock { on: cfg.timing };
    let heat = HeatConfig::new(cfg.nu, cfg.dx, cfg.dt, cfg.heat_unknowns());
    let (a, _) = heat_system(&heat, &heat.initial)?;
    let rhs = |u: &ComplexVector| Ok(heat_system(&heat, u)?.1);
    let opts = solver_options(cfg);
    let classical = step_timed(&a, heat.initial.clone(), cfg.steps, Backend::Classical, &clock, rhs)?;
    let qsvt = step_timed(&a, heat.initial.clone(), cfg.steps, Backend::Qsvt { options: &opts, phases: source }, &clock, rhs)?;
    let deviation = max_deviation(&classical.states, &qsvt.states);

    let threshold = heat_stability_threshold(&heat);
    let explicit = heat_explicit_evolve(&heat, cfg.steps)?;
    let explicit_max = explicit.iter().map(|u| u.max_abs()).fold(0.0, f64::max);

    let mut meta = common_meta(cfg);
    meta.extend([
        ("nu", cfg.nu.to_string()),
        ("dx", cfg.dx.to_string()),
        ("dt", cfg.dt.to_string()),
        ("lambda", fmt_f64(heat.lambda())),
        ("steps", cfg.steps.to_string()),
        ("dirichlet_left", heat.dirichlet_left.to_string()),
        ("neumann_right", heat.neumann_right.to_string()),
        ("explicit_dt_threshold", fmt_f64(threshold)),
        ("explicit_max_abs", fmt_f64(explicit_max)),
    ]);
    if let Some(r) = qsvt.reports.first() {
        meta.extend([("kappa", r.kappa_used.to_string()), ("degree", r.degree_used.to_string())]);
    }
    meta.push(("max_deviation", fmt_f64(deviation)));

    let with_boundary = |states: &[ComplexVector]| -> Vec<Vec<Complex64>> {
        states
            .iter()
            .map(|u| std::iter::once(Complex64::new(heat.dirichlet_left, 0.0)).chain(u.iter().copied()).collect())
            .collect()
    };
    for (name, run) in [("heat_classical.csv", &classical), ("heat_qsvt.csv", &qsvt)] {
        let path = cfg.out.join(name);
        let mut m = meta.clone();
        m.push(("backend", if name.contains("qsvt") { "qsvt" } else { "classical" }.to_string()));
        write_trajectory(&path, &m, cfg.dt, &with_boundary(&run.states), &run.walls)?;
        out.files.push(path);
    }

    let summary_path = cfg.out.join("summary.csv");
    let mut summary = CsvOut::create(&summary_path, &meta, &SUMMARY_HEADER)?;
    for (k, r) in qsvt.reports.iter().enumerate() {
        let (_, b) = heat_system(&heat, &qsvt.states[k])?;
        let residual = a.mul_vec(&qsvt.states[k + 1])?.sub(&b).norm() / b.norm();
        summary.row(summary_row(&format!("heat_step{}", k + 1), heat.unknowns, r, residual, qsvt.walls[k + 1]))?;
    }
    summary.finish()?;
    out.files.push(summary_path);

    if let Some(r) = qsvt.reports.first() {
        out.note("kappa", r.kappa_used);
        out.note("degree", r.degree_used);
    }
    out.note("max_deviation", fmt_f64(deviation));
    out.note("explicit_dt_threshold", fmt_f64(threshold));
    out.note("explicit_stable", cfg.dt <= threshold);
    Ok(())
}

fn run_burgers(cfg: &ExperimentConfig, source: &dyn PhaseSource, out: &mut RunOutput) -> Result<()> {
    let clock = Clock { on: cfg.timing };
    let s = cfg.grid_points;
    let u0 = burgers_initial_state(s)?;
    let sys = carleman_matrix(&burgers_ode(s, cfg.nu)?, cfg.truncation)?.with_initial(&u0)?;
    let (l, _) = carleman_implicit_system(&sys, &sys.y_in, cfg.dt)?;
    let rhs = |y: &ComplexVector| Ok(carleman_implicit_system(&sys, y, cfg.dt)?.1);
    let opts = solver_options(cfg);
    let classical = step_timed(&l, sys.y_in.clone(), cfg.steps, Backend::Classical, &clock, rhs)?;
    let qsvt = step_timed(&l, sys.y_in.clone(), cfg.steps, Backend::Qsvt { options: &opts, phases: source }, &clock, rhs)?;

    let dt_ref = cfg.dt / 100.0;
    let t_end = cfg.dt * cfg.steps as f64;
    let (reference, ref_wall) = clock.time(|| burgers_reference_explicit(s, cfg.nu, dt_ref, t_end, cfg.dt));
    let reference: Vec<ComplexVector> = reference?.into_iter().map(|(_, u)| u).collect();

    let level_one = |run: &Stepped| -> Vec<ComplexVector> { run.states.iter().map(|y| sys.level_one(y)).collect() };
    let (uq, uc) = (level_one(&qsvt), level_one(&classical));
    let dev_classical = max_deviation(&uq, &uc);
    let dev_reference = max_deviation(&uq, &reference);

    let mut meta = common_meta(cfg);
    meta.extend([
        ("grid_points", s.to_string()),
        ("nu", cfg.nu.to_string()),
        ("dt", cfg.dt.to_string()),
        ("steps", cfg.steps.to_string()),
        ("truncation", cfg.truncation.to_string()),
        ("carleman_dimension", sys.dimension.to_string()),
        ("reference_dt", fmt_f64(dt_ref)),
        ("reported_degrees", REPORTED_BURGERS_DEGREES.to_string()),
        ("max_deviation_classical", fmt_f64(dev_classical)),
        ("max_deviation_reference", fmt_f64(dev_reference)),
    ]);
    if let Some(r) = qsvt.reports.first() {
        meta.extend([("kappa", r.kappa_used.to_string()), ("degree", r.degree_used.to_string())]);
    }
    let with_boundary = |states: &[ComplexVector]| -> Vec<Vec<Complex64>> {
        let zero = Complex64::new(0.0, 0.0);
        states.iter().map(|u| std::iter::once(zero).chain(u.iter().copied()).chain([zero]).collect()).collect()
    };
    let mut ref_walls = vec![0.0; reference.len()];
    if let Some(last) = ref_walls.last_mut() {
        *last = ref_wall;
    }
    for (name, states, walls) in [
        ("burgers_qsvt.csv", &uq, &qsvt.walls),
        ("burgers_classical.csv", &uc, &classical.walls),
        ("burgers_reference.csv", &reference, &ref_walls),
    ] {
        let path = cfg.out.join(name);
        write_trajectory(&path, &meta, cfg.dt, &with_boundary(states), walls)?;
        out.files.push(path);
    }

    let summary_path = cfg.out.join("summary.csv");
    let mut summary = CsvOut::create(&summary_path, &meta, &SUMMARY_HEADER)?;
    for (k, r) in qsvt.reports.iter().enumerate() {
        let (_, b) = carleman_implicit_system(&sys, &qsvt.states[k], cfg.dt)?;
        let residual = l.mul_vec(&qsvt.states[k + 1])?.sub(&b).norm() / b.norm();
        summary.row(summary_row(&format!("burgers_step{}", k + 1), sys.dimension, r, residual, qsvt.walls[k + 1]))?;
    }
    summary.finish()?;
    out.files.push(summary_path);

    if let Some(r) = qsvt.reports.first() {
        out.note("kappa", r.kappa_used);
        out.note("degree", r.degree_used);
    }
    out.note("reported_degrees", REPORTED_BURGERS_DEGREES);
    out.note("max_deviation_classical", fmt_f64(dev_classical));
    out.note("max_deviation_reference", fmt_f64(dev_reference));
    Ok(())
}

fn run_scaling_dt(cfg: &ExperimentConfig, out: &mut RunOutput) -> Result<()> {
    let n = cfg.heat_unknowns();
    if !n.is_power_of_two() {
        return Err(CliError::config("scaling-dt needs dx = 1/2^n"));
    }
    let points: Vec<(usize, f64)> = cfg.dt_grid.iter().map(|&dt| (n.trailing_zeros() as usize, dt)).collect();
    let records = run_scaling(Sweep::Dt, &points, cfg.nu, cfg.epsilon, cfg.jobs);
    let mut meta = common_meta(cfg);
    meta.extend([("nu", cfg.nu.to_string()), ("dx", cfg.dx.to_string())]);
    let path = cfg.out.join("scaling_dt.csv");
    write_scaling_csv(&path, &meta, &records, cfg.timing)?;
    out.files.push(path);
    out.note("points", records.len());
    out.note("failed", records.iter().filter(|r| !r.is_ok()).count());
    Ok(())
}

fn run_scaling_qubits(cfg: &ExperimentConfig, out: &mut RunOutput) -> Result<()> {
    let points: Vec<(usize, f64)> =
        cfg.dt_grid.iter().flat_map(|&dt| cfg.qubits.iter().map(move |&n| (n, dt))).collect();
    let records = run_scaling(Sweep::Qubits, &points, cfg.nu, cfg.epsilon, cfg.jobs);
    let mut meta = common_meta(cfg);
    meta.push(("nu", cfg.nu.to_string()));
    let path = cfg.out.join("scaling_qubits.csv");
    write_scaling_csv(&path, &meta, &records, cfg.timing)?;
    out.files.push(path);
    out.note("points", records.len());
    out.note("failed", records.iter().filter(|r| !r.is_ok()).count());

    let ext_path = cfg.out.join("extrapolation.csv");
    let mut ext = CsvOut::create(
        &ext_path,
        &meta,
        &[
            "dt",
            "test_n",
            "a",
            "b",
            "c",
            "d",
            "residual_rms",
            "predicted_sigma_min",
            "predicted_kappa",
            "predicted_degree",
            "actual_sigma_min",
            "relative_error",
            "wall_time_ms",
        ],
    )?;
    let clock = Clock { on: cfg.timing };
    let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    for &dt in &cfg.dt_grid {
        let (e, wall) = clock.time(|| extrapolate_report(&records, dt, cfg.test_n, cfg.nu, cfg.epsilon));
        let e = e?;
        ext.row([
            fmt_f64(dt),
            e.test_n.to_string(),
            fmt_f64(e.fit.a),
            fmt_f64(e.fit.b),
            fmt_f64(e.fit.c),
            fmt_f64(e.fit.d),
            fmt_f64(e.fit.residual_rms),
            fmt_f64(e.predicted_sigma_min),
            opt(e.predicted_kappa),
            e.predicted_degree.map(|d| d.to_string()).unwrap_or_default(),
            opt(e.actual_sigma_min),
            opt(e.relative_error),
            fmt_f64(wall),
        ])?;
        if let Some(err) = e.relative_error {
            out.note(&format!("relative_error_dt{dt}"), fmt_f64(err));
        }
    }
    ext.finish()?;
    out.files.push(ext_path);
    Ok(())
}
