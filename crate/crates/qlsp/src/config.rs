//! Experiment parameters from flags and an optional `key=value` file.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    Complex,
    Heat,
    Burgers,
    ScalingDt,
    ScalingQubits,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Complex => "complex",
            Experiment::Heat => "heat",
            Experiment::Burgers => "burgers",
            Experiment::ScalingDt => "scaling-dt",
            Experiment::ScalingQubits => "scaling-qubits",
        }
    }
}

/// Raw, possibly partial parameters. Flags override values from `--config`.
#[derive(Debug, Clone, Default, PartialEq, Args)]
pub struct Params {
    #[arg(long, value_enum)]
    pub experiment: Option<Experiment>,
    /// Diffusivity (heat) or viscosity (Burgers).
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub dx: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Burgers grid size S, boundaries included.
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Carleman truncation order N.
    #[arg(long)]
    pub truncation: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Fixed κ instead of the ladder.
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub phase_cache: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Matrix qubits: one value for `complex`, a comma list for `scaling-qubits`.
    #[arg(long, value_delimiter = ',')]
    pub qubits: Option<Vec<usize>>,
    /// Time steps for `scaling-qubits`.
    #[arg(long, value_delimiter = ',')]
    pub dts: Option<Vec<f64>>,
    #[arg(long)]
    pub dt_min: Option<f64>,
    #[arg(long)]
    pub dt_max: Option<f64>,
    #[arg(long)]
    pub dt_points: Option<usize>,
    /// Qubit count at which the `scaling-qubits` fit is tested.
    #[arg(long)]
    pub test_n: Option<usize>,
    /// Write zeros in every wall_time_ms column.
    #[arg(long)]
    pub no_timing: bool,
}

macro_rules! merge_fields {
    ($hi:ident, $lo:ident; $($f:ident),*) => {
        Params { $($f: $hi.$f.or($lo.$f),)* no_timing: $hi.no_timing || $lo.no_timing }
    };
}

impl Params {
    /// `self` wins wherever it has a value.
    pub fn over(self, lo: Params) -> Params {
        let hi = self;
        merge_fields!(hi, lo; experiment, nu, dx, dt, grid_points, truncation, epsilon, kappa, steps, seed,
            out, phase_cache, jobs, qubits, dts, dt_min, dt_max, dt_points, test_n)
    }

    /// `key=value` lines; `#` starts a comment, `-` and `_` are interchangeable.
    pub fn parse_file_text(text: &str) -> Result<Params> {
        let mut p = Params::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("line {}: expected key=value", lineno + 1)))?;
            let key = k.trim().replace('_', "-");
            let v = v.trim();
            let err = |what: &str| CliError::config(format!("line {}: bad {what} `{v}`", lineno + 1));
            let f = |what: &str| v.parse::<f64>().map_err(|_| err(what));
            let u = |what: &str| v.parse::<usize>().map_err(|_| err(what));
            match key.as_str() {
                "experiment" => {
                    p.experiment = Some(Experiment::from_str(v, true).map_err(|_| err("experiment"))?)
                }
                "nu" => p.nu = Some(f("nu")?),
                "dx" => p.dx = Some(f("dx")?),
                "dt" => p.dt = Some(f("dt")?),
                "grid-points" => p.grid_points = Some(u("grid-points")?),
                "truncation" => p.truncation = Some(u("truncation")?),
                "epsilon" => p.epsilon = Some(f("epsilon")?),
                "kappa" => p.kappa = Some(f("kappa")?),
                "steps" => p.steps = Some(u("steps")?),
                "seed" => p.seed = Some(v.parse().map_err(|_| err("seed"))?),
                "out" => p.out = Some(PathBuf::from(v)),
                "phase-cache" => p.phase_cache = Some(PathBuf::from(v)),
                "jobs" => p.jobs = Some(u("jobs")?),
                "qubits" => {
                    p.qubits = Some(v.split(',').map(|s| s.trim().parse()).collect::<Result<_, _>>().map_err(|_| err("qubits"))?)
                }
                "dts" => p.dts = Some(v.split(',').map(|s| s.trim().parse()).collect::<Result<_, _>>().map_err(|_| err("dts"))?),
                "dt-min" => p.dt_min = Some(f("dt-min")?),
                "dt-max" => p.dt_max = Some(f("dt-max")?),
                "dt-points" => p.dt_points = Some(u("dt-points")?),
                "test-n" => p.test_n = Some(u("test-n")?),
                "no-timing" => p.no_timing = matches!(v, "true" | "1" | "yes"),
                other => return Err(CliError::config(format!("line {}: unknown key `{other}`", lineno + 1))),
            }
        }
        Ok(p)
    }

    pub fn from_file(path: &Path) -> Result<Params> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        Self::parse_file_text(&text)
    }
}

/// Fully resolved parameters for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub nu: f64,
    pub dx: f64,
    pub dt: f64,
    pub grid_points: usize,
    pub truncation: usize,
    pub epsilon: f64,
    pub kappa: Option<f64>,
    pub steps: usize,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub phase_cache: Option<PathBuf>,
    pub jobs: usize,
    pub timing: bool,
    pub qubits: Vec<usize>,
    pub dt_grid: Vec<f64>,
    pub test_n: usize,
}

/// `count` points log-spaced over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect()
        }
    }
}

impl ExperimentConfig {
    pub fn resolve(p: Params) -> Result<Self> {
        let experiment = p.experiment.ok_or_else(|| CliError::config("--experiment is required"))?;
        use Experiment::*;
        let (nu, dt, steps) = match experiment {
            Burgers => (p.nu.unwrap_or(0.01), p.dt.unwrap_or(0.1), p.steps.unwrap_or(3)),
            _ => (p.nu.unwrap_or(0.01), p.dt.unwrap_or(1.0), p.steps.unwrap_or(100)),
        };
        let qubits = p.qubits.clone().unwrap_or_else(|| match experiment {
            ScalingQubits => vec![3, 4, 5, 6],
            _ => vec![3],
        });
        let dt_grid = match experiment {
            ScalingDt => log_grid(p.dt_min.unwrap_or(0.01), p.dt_max.unwrap_or(4.0), p.dt_points.unwrap_or(25)),
            ScalingQubits => p.dts.clone().or(p.dt.map(|d| vec![d])).unwrap_or_else(|| vec![1.0, 2.0, 3.0]),
            _ => vec![dt],
        };
        let cfg = ExperimentConfig {
            experiment,
            nu,
            dx: p.dx.unwrap_or(0.125),
            dt,
            grid_points: p.grid_points.unwrap_or(7),
            truncation: p.truncation.unwrap_or(2),
            epsilon: p.epsilon.unwrap_or(0.1),
            kappa: p.kappa,
            steps,
            seed: p.seed,
            out: p.out.unwrap_or_else(|| PathBuf::from("qlsp-out")),
            phase_cache: p.phase_cache,
            jobs: p.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
            timing: !p.no_timing,
            qubits,
            dt_grid,
            test_n: p.test_n.unwrap_or(7),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::config(format!("{name} must be positive and finite")))
            }
        };
        pos("nu", self.nu)?;
        pos("dx", self.dx)?;
        pos("dt", self.dt)?;
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(CliError::config("epsilon must lie in (0, 1)"));
        }
        if self.kappa.is_some_and(|k| !(k > 1.0 && k.is_finite())) {
            return Err(CliError::config("kappa must be a finite value above 1"));
        }
        if self.jobs == 0 {
            return Err(CliError::config("jobs must be at least 1"));
        }
        match self.experiment {
            Experiment::Complex => {
                if self.seed.is_none() {
                    return Err(CliError::config("the complex experiment needs --seed"));
                }
                if self.qubits.len() != 1 || !(1..=8).contains(&self.qubits[0]) {
                    return Err(CliError::config("complex takes a single --qubits value in 1..=8"));
                }
            }
            Experiment::Heat => {
                let n = (1.0 / self.dx).round();
                if !((1.0 / self.dx - n).abs() < 1e-9 && n >= 2.0) {
                    return Err(CliError::config("heat needs dx = 1/N for an integer N >= 2"));
                }
            }
            Experiment::Burgers => {
                if self.grid_points < 4 {
                    return Err(CliError::config("burgers needs --grid-points >= 4"));
                }
                if !(1..=3).contains(&self.truncation) {
                    return Err(CliError::config("truncation must lie in 1..=3"));
                }
            }
            Experiment::ScalingDt | Experiment::ScalingQubits => {
                if self.dt_grid.is_empty() || self.dt_grid.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
                    return Err(CliError::config("sweep time steps must be positive"));
                }
                if self.qubits.is_empty() || self.qubits.iter().any(|&n| !(1..=10).contains(&n)) {
                    return Err(CliError::config("sweep qubit counts must lie in 1..=10"));
                }
            }
        }
        Ok(())
    }

    /// Heat unknowns for the configured `dx`.
    pub fn heat_unknowns(&self) -> usize {
        (1.0 / self.dx).round() as usize
    }
}
