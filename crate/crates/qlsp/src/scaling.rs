//! Resource sweeps over the heat problem: conditioning, polynomial degree and
//! success probability against `Δt` or the number of matrix qubits.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use qlsp_core::blockenc::banded_spec_from_matrix;
use qlsp_core::invpoly::{degree_parameters, inverse_target_eval, inverse_target_max, SAFETY_SCALE};
use qlsp_core::numerics::{fit_double_exponential, singular_extrema, DoubleExpFit};
use qlsp_core::pde::{heat_system, HeatConfig};
use qlsp_core::qsvt::svd_transform;
use qlsp_core::{ComplexVector, Error};

use crate::error::{CliError, Result};
use crate::formats::{fmt_f64, CsvOut, CsvTable};

/// Powers of two from 2 to 2^20.
pub fn extended_kappa_ladder() -> Vec<f64> {
    (1..=20).map(|k| f64::from(1u32 << k)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sweep {
    Dt,
    Qubits,
}

impl Sweep {
    pub fn name(self) -> &'static str {
        match self {
            Sweep::Dt => "dt",
            Sweep::Qubits => "qubits",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "dt" => Some(Sweep::Dt),
            "qubits" => Some(Sweep::Qubits),
            _ => None,
        }
    }
}

/// One sweep point. Failed points keep `status` as the error text and NaN
/// (or `None`) in the fields they could not reach.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRecord {
    pub sweep: Sweep,
    pub n_qubits: usize,
    pub dt: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub sigma_min: f64,
    pub kappa: f64,
    pub degree: Option<usize>,
    pub success_probability: f64,
    pub status: String,
    pub wall_time_ms: f64,
}

impl ScalingRecord {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

fn heat_at(nu: f64, n_qubits: usize, dt: f64) -> qlsp_core::Result<(HeatConfig, qlsp_core::ComplexMatrix, ComplexVector)> {
    let unknowns = 1usize << n_qubits;
    let cfg = HeatConfig::new(nu, 1.0 / unknowns as f64, dt, unknowns);
    let (a, b) = heat_system(&cfg, &cfg.initial)?;
    Ok((cfg, a, b))
}

/// `(α, σ_min(A)/α)` of the first implicit heat step on `2^n_qubits` unknowns.
pub fn heat_conditioning(nu: f64, n_qubits: usize, dt: f64) -> qlsp_core::Result<(f64, f64)> {
    let (_, a, _) = heat_at(nu, n_qubits, dt)?;
    let alpha = banded_spec_from_matrix(&a.adjoint())?.alpha();
    let (_, smin) = singular_extrema(&a)?;
    Ok((alpha, smin / alpha))
}

/// Evaluates one point. The success probability is the squared norm of the
/// scaled, untruncated inverse target applied to the normalized first-step
/// right-hand side, computed densely.
pub fn scaling_point(sweep: Sweep, nu: f64, n_qubits: usize, dt: f64, epsilon: f64, ladder: &[f64]) -> ScalingRecord {
    let mut rec = ScalingRecord {
        sweep,
        n_qubits,
        dt,
        lambda: nu * dt * (1u64 << (2 * n_qubits)) as f64,
        alpha: f64::NAN,
        sigma_min: f64::NAN,
        kappa: f64::NAN,
        degree: None,
        success_probability: f64::NAN,
        status: String::new(),
        wall_time_ms: 0.0,
    };
    let start = Instant::now();
    let outcome = (|| -> qlsp_core::Result<()> {
        let (_, a, b) = heat_at(nu, n_qubits, dt)?;
        let adj = a.adjoint();
        rec.alpha = banded_spec_from_matrix(&adj)?.alpha();
        let (_, smin) = singular_extrema(&a)?;
        rec.sigma_min = smin / rec.alpha;
        let sigma = rec.sigma_min;
        rec.kappa = ladder.iter().copied().find(|&k| 1.0 / k < sigma).ok_or(Error::Conditioning {
            sigma_min: sigma,
            max_kappa: ladder.last().copied().unwrap_or(f64::NAN),
        })?;
        let (bpar, degree) = degree_parameters(rec.kappa, epsilon)?;
        rec.degree = Some(degree);
        let scale = SAFETY_SCALE / inverse_target_max(bpar);
        let t = svd_transform(&adj.scaled_real(1.0 / rec.alpha), degree, |x| scale * inverse_target_eval(x, bpar))?;
        let b_hat = b.scaled((1.0 / b.norm()).into());
        rec.success_probability = t.mul_vec(&b_hat)?.norm_sqr();
        Ok(())
    })();
    rec.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    rec.status = match outcome {
        Ok(()) => "ok".into(),
        Err(e) => e.to_string(),
    };
    rec
}

/// Applies `f` to every item on at most `jobs` threads; results keep input order.
pub fn parallel_map<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<R>>> = items.iter().map(|_| Mutex::new(None)).collect();
    let workers = jobs.clamp(1, items.len().max(1));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                *slots[i].lock().unwrap_or_else(|p| p.into_inner()) = Some(r);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().unwrap_or_else(|p| p.into_inner()).expect("every slot filled"))
        .collect()
}

/// Runs every `(n_qubits, dt)` point of a sweep.
pub fn run_scaling(sweep: Sweep, points: &[(usize, f64)], nu: f64, epsilon: f64, jobs: usize) -> Vec<ScalingRecord> {
    let ladder = extended_kappa_ladder();
    parallel_map(points, jobs, |&(n, dt)| scaling_point(sweep, nu, n, dt, epsilon, &ladder))
}

pub const SCALING_HEADER: [&str; 11] = [
    "sweep",
    "n_qubits",
    "dt",
    "lambda",
    "alpha",
    "sigma_min",
    "kappa",
    "degree",
    "success_probability",
    "status",
    "wall_time_ms",
];

pub fn write_scaling_csv(path: &Path, metadata: &[(&str, String)], records: &[ScalingRecord], timing: bool) -> Result<()> {
    let mut out = CsvOut::create(path, metadata, &SCALING_HEADER)?;
    for r in records {
        out.row([
            r.sweep.name().to_string(),
            r.n_qubits.to_string(),
            fmt_f64(r.dt),
            fmt_f64(r.lambda),
            fmt_f64(r.alpha),
            fmt_f64(r.sigma_min),
            fmt_f64(r.kappa),
            r.degree.map(|d| d.to_string()).unwrap_or_default(),
            fmt_f64(r.success_probability),
            r.status.clone(),
            fmt_f64(if timing { r.wall_time_ms } else { 0.0 }),
        ])?;
    }
    out.finish()
}

pub fn read_scaling_csv(path: &Path) -> Result<Vec<ScalingRecord>> {
    let table = CsvTable::read(path)?;
    let col: Vec<usize> = SCALING_HEADER.iter().map(|h| table.column(h)).collect::<Result<_>>()?;
    let bad = |detail: String| CliError::Format { what: "scaling csv", detail };
    let num = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("bad number `{s}`")));
    table
        .rows
        .iter()
        .map(|row| {
            let get = |k: usize| row.get(col[k]).map(String::as_str).ok_or_else(|| bad("short row".into()));
            Ok(ScalingRecord {
                sweep: Sweep::parse(get(0)?).ok_or_else(|| bad(format!("unknown sweep `{}`", row[col[0]])))?,
                n_qubits: get(1)?.parse().map_err(|_| bad("bad n_qubits".into()))?,
                dt: num(get(2)?)?,
                lambda: num(get(3)?)?,
                alpha: num(get(4)?)?,
                sigma_min: num(get(5)?)?,
                kappa: num(get(6)?)?,
                degree: match get(7)? {
                    "" => None,
                    s => Some(s.parse().map_err(|_| bad("bad degree".into()))?),
                },
                success_probability: num(get(8)?)?,
                status: get(9)?.to_string(),
                wall_time_ms: num(get(10)?)?,
            })
        })
        .collect()
}

/// Double-exponential fit of `σ_min` against qubit count, evaluated at `test_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Extrapolation {
    pub dt: f64,
    pub test_n: usize,
    pub fit: DoubleExpFit,
    pub fitted_points: usize,
    pub predicted_sigma_min: f64,
    pub predicted_kappa: Option<f64>,
    pub predicted_degree: Option<usize>,
    /// Direct value at `test_n`, computed when `test_n <= 7`.
    pub actual_sigma_min: Option<f64>,
    pub relative_error: Option<f64>,
}

/// Fits successful qubit-sweep records with this `dt` and `n < test_n`.
pub fn extrapolate_report(records: &[ScalingRecord], dt: f64, test_n: usize, nu: f64, epsilon: f64) -> Result<Extrapolation> {
    let used: Vec<&ScalingRecord> = records
        .iter()
        .filter(|r| r.sweep == Sweep::Qubits && r.is_ok() && r.n_qubits < test_n && (r.dt - dt).abs() <= 1e-12 * dt.abs().max(1.0))
        .collect();
    if used.len() < 4 {
        return Err(Error::Fit(format!("need at least 4 successful points below n = {test_n} at dt = {dt}, have {}", used.len())).into());
    }
    let xs: Vec<f64> = used.iter().map(|r| r.n_qubits as f64).collect();
    let ys: Vec<f64> = used.iter().map(|r| r.sigma_min).collect();
    let fit = fit_double_exponential(&xs, &ys)?;
    let predicted = fit.eval(test_n as f64);
    let ladder = extended_kappa_ladder();
    let predicted_kappa = (predicted > 0.0).then(|| ladder.iter().copied().find(|&k| 1.0 / k < predicted)).flatten();
    let predicted_degree = predicted_kappa.and_then(|k| degree_parameters(k, epsilon).ok()).map(|(_, d)| d);
    let actual = if test_n <= 7 { Some(heat_conditioning(nu, test_n, dt)?.1) } else { None };
    Ok(Extrapolation {
        dt,
        test_n,
        fit,
        fitted_points: used.len(),
        predicted_sigma_min: predicted,
        predicted_kappa,
        predicted_degree,
        actual_sigma_min: actual,
        relative_error: actual.map(|s| (predicted - s).abs() / s),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_map_keeps_order() {
        let items: Vec<usize> = (0..37).collect();
        for jobs in [1, 3, 64] {
            assert_eq!(parallel_map(&items, jobs, |&i| i * i), items.iter().map(|i| i * i).collect::<Vec<_>>());
        }
        assert!(parallel_map(&[] as &[usize], 4, |&i| i).is_empty());
    }

    #[test]
    fn point_matches_reference_heat_setup() {
        let r = scaling_point(Sweep::Dt, 0.01, 3, 1.0, 0.1, &extended_kappa_ladder());
        assert!(r.is_ok(), "{}", r.status);
        assert!((r.alpha - 4.84).abs() < 1e-12);
        assert!((r.lambda - 0.64).abs() < 1e-12);
        assert!(r.success_probability > 0.0 && r.success_probability <= 1.0);
        assert!(1.0 / r.kappa < r.sigma_min && r.sigma_min <= 2.0 / r.kappa);
    }

    #[test]
    fn failures_become_flagged_rows() {
        let r = scaling_point(Sweep::Dt, 0.01, 3, 1.0, 0.1, &[2.0]);
        assert!(!r.is_ok());
        assert!(r.degree.is_none() && r.success_probability.is_nan());
        let bad = scaling_point(Sweep::Dt, -1.0, 3, 1.0, 0.1, &[2.0]);
        assert!(!bad.is_ok() && bad.alpha.is_nan());
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let recs = run_scaling(Sweep::Qubits, &[(3, 1.0), (4, 2.0)], 0.01, 0.1, 2);
        let mut flagged = recs.clone();
        flagged.push(scaling_point(Sweep::Qubits, 0.01, 3, 1.0, 0.1, &[2.0]));
        write_scaling_csv(&path, &[("nu", "0.01".into())], &flagged, true).unwrap();
        let back = read_scaling_csv(&path).unwrap();
        assert_eq!(back.len(), 3);
        for (a, b) in flagged.iter().zip(&back) {
            assert_eq!(a.status, b.status);
            assert_eq!(a.degree, b.degree);
            assert!(a.sigma_min.to_bits() == b.sigma_min.to_bits() || (a.sigma_min.is_nan() && b.sigma_min.is_nan()));
        }
    }

    #[test]
    fn extrapolation_needs_four_points() {
        let recs = run_scaling(Sweep::Qubits, &[(3, 1.0), (4, 1.0), (5, 1.0)], 0.01, 0.1, 2);
        let e = extrapolate_report(&recs, 1.0, 7, 0.01, 0.1).unwrap_err();
        assert_eq!(e.exit_code(), 5);
    }
}
