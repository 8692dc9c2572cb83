use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;

use num_complex::Complex64;

use super::{assemble_qsvt_circuit, qsvt_block, QsvtConfig};
use crate::blockenc::{banded_spec_from_matrix, build_block_encoding, build_dilation_encoding, pad_to_power_of_two, BlockEncoding};
use crate::invpoly::{chebyshev_inverse_coefficients, convert_phases_reflection, find_phases_wx, PhaseSequence};
use crate::numerics::{singular_extrema, ComplexMatrix, ComplexVector};
use crate::statevector::{apply_circuit, postselect, prepare_state, QuantumState, RegisterId, MAX_QUBITS};
use crate::{Error, Result};

pub const DEFAULT_KAPPA_LADDER: [f64; 5] = [2.0, 4.0, 8.0, 16.0, 32.0];

/// Supplies reflection-convention inverse phases for `(κ, ε)`.
pub trait PhaseSource {
    fn phases(&self, kappa: f64, epsilon: f64) -> Result<PhaseSequence>;
}

/// Computes phases on demand and keeps them for the lifetime of the memo.
#[derive(Debug, Default)]
pub struct PhaseMemo {
    entries: RefCell<BTreeMap<(u64, u64), PhaseSequence>>,
}

impl PhaseMemo {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Fresh reflection phases, bypassing any memo.
    pub fn compute(kappa: f64, epsilon: f64) -> Result<PhaseSequence> {
        let poly = chebyshev_inverse_coefficients(kappa, epsilon)?;
        convert_phases_reflection(&find_phases_wx(&poly)?)
    }
}

impl PhaseSource for PhaseMemo {
    fn phases(&self, kappa: f64, epsilon: f64) -> Result<PhaseSequence> {
        let key = (kappa.to_bits(), epsilon.to_bits());
        if let Some(p) = self.entries.borrow().get(&key) {
            return Ok(p.clone());
        }
        let p = Self::compute(kappa, epsilon)?;
        self.entries.borrow_mut().insert(key, p.clone());
        Ok(p)
    }
}

/// Which block encoder the solver uses for `A†`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EncoderChoice {
    /// Banded encoder when it fits in the qubit budget, dilation otherwise.
    #[default]
    Auto,
    Banded,
    /// Dense unitary dilation with `α = ||A||₂`.
    Dilation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub epsilon: f64,
    /// Skips the ladder when set.
    pub kappa: Option<f64>,
    pub kappa_ladder: Vec<f64>,
    pub encoder: EncoderChoice,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { epsilon: 0.1, kappa: None, kappa_ladder: DEFAULT_KAPPA_LADDER.to_vec(), encoder: EncoderChoice::Auto }
    }
}

impl SolverOptions {
    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = Some(kappa);
        self
    }

    /// Smallest ladder `κ` with `1/κ < σ_min`, or the override.
    pub fn pick_kappa(&self, sigma_min: f64) -> Result<f64> {
        if let Some(k) = self.kappa {
            return Ok(k);
        }
        let mut ladder = self.kappa_ladder.clone();
        ladder.sort_by(f64::total_cmp);
        ladder.iter().copied().find(|&k| 1.0 / k < sigma_min).ok_or(Error::Conditioning {
            sigma_min,
            max_kappa: ladder.last().copied().unwrap_or(f64::NAN),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub solution: ComplexVector,
    pub success_probability: f64,
    /// `||y||/(α·β_eff)`.
    pub rescale: f64,
    pub kappa_used: f64,
    pub degree_used: usize,
    pub alpha: f64,
    /// Smallest singular value of `A/α`.
    pub sigma_min: f64,
    pub beta_effective: f64,
}

/// Scale of the circuit's polynomial at `σ = 1`, read from the assembled QSVT
/// applied to the probe `diag(1, 1/2)`.
pub fn calibrate_beta(phases: &PhaseSequence) -> Result<f64> {
    let probe = ComplexMatrix::diagonal(&[Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0)]);
    let encoding = build_dilation_encoding(&probe, 1.0)?;
    let block = qsvt_block(&QsvtConfig { encoding, phases: phases.clone(), real_part: true })?;
    let beta = block[(0, 0)].re;
    if !(beta > 0.0) {
        return Err(Error::invalid("phase sequence has no positive response at sigma = 1"));
    }
    Ok(beta)
}

/// Everything about a solve that does not depend on the right-hand side.
#[derive(Debug, Clone)]
pub struct PreparedSolver {
    config: QsvtConfig,
    circuit: crate::statevector::Circuit,
    dim: usize,
    alpha: f64,
    sigma_min: f64,
    kappa: f64,
    beta_effective: f64,
}

impl PreparedSolver {
    pub fn new(a: &ComplexMatrix, opts: &SolverOptions, source: &dyn PhaseSource) -> Result<Self> {
        if !a.is_square() || a.rows() == 0 {
            return Err(Error::invalid("the system matrix must be square and nonempty"));
        }
        if !a.is_finite() {
            return Err(Error::invalid("the system matrix has non-finite entries"));
        }
        let padded_adj = pad_to_power_of_two(&a.adjoint());
        let encoding = encode(&padded_adj, opts.encoder)?;
        let alpha = encoding.alpha;
        let (_, smin) = singular_extrema(a)?;
        let sigma_min = smin / alpha;
        let kappa = opts.pick_kappa(sigma_min)?;
        let phases = source.phases(kappa, opts.epsilon)?;
        let beta_effective = calibrate_beta(&phases)?;
        let config = QsvtConfig { encoding, phases, real_part: true };
        let circuit = assemble_qsvt_circuit(&config)?;
        if circuit.layout().total() > MAX_QUBITS {
            return Err(Error::resource("QSVT circuit exceeds the simulator qubit budget"));
        }
        Ok(Self { config, circuit, dim: a.rows(), alpha, sigma_min, kappa, beta_effective })
    }

    pub fn config(&self) -> &QsvtConfig {
        &self.config
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigma_min
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn degree(&self) -> usize {
        self.config.phases.degree()
    }

    pub fn beta_effective(&self) -> f64 {
        self.beta_effective
    }

    /// Post-selected state (QSP and flags all zero) and its probability.
    pub fn run(&self, y: &ComplexVector) -> Result<(QuantumState, f64)> {
        if y.dim() != self.dim {
            return Err(Error::invalid("right-hand side has the wrong dimension"));
        }
        let norm = y.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::invalid("right-hand side must be a nonzero finite vector"));
        }
        let layout = self.circuit.layout();
        let prep = prepare_state(y, layout, RegisterId::Matrix)?;
        let state = apply_circuit(&QuantumState::zero(layout), &prep)?;
        let out = apply_circuit(&state, &self.circuit)?;
        let anc: Vec<usize> = (0..layout.n_qsp() + layout.n_flag()).collect();
        postselect(&out, &anc, &vec![false; anc.len()])
    }

    pub fn solve(&self, y: &ComplexVector) -> Result<SolveReport> {
        let (state, p) = self.run(y)?;
        let rescale = y.norm() / (self.alpha * self.beta_effective);
        let s = p.sqrt() * rescale;
        // Post-selected amplitudes sit at the low (matrix) indices.
        let entries: Vec<Complex64> = state.amplitudes().as_slice()[..self.dim].iter().map(|z| z * s).collect();
        let solution = ComplexVector::new(entries)?;
        Ok(SolveReport {
            solution,
            success_probability: p,
            rescale,
            kappa_used: self.kappa,
            degree_used: self.degree(),
            alpha: self.alpha,
            sigma_min: self.sigma_min,
            beta_effective: self.beta_effective,
        })
    }
}

fn encode(adj: &ComplexMatrix, choice: EncoderChoice) -> Result<BlockEncoding> {
    let banded = || -> Result<BlockEncoding> {
        let spec = banded_spec_from_matrix(adj)?;
        // Flags, matrix qubits and the QSP qubit must all fit.
        let n = adj.rows().trailing_zeros() as usize;
        if spec.data_qubits() + 1 + n + 1 > MAX_QUBITS {
            return Err(Error::resource("banded encoding needs too many qubits"));
        }
        build_block_encoding(&spec)
    };
    let dilation = || -> Result<BlockEncoding> {
        let (smax, _) = singular_extrema(adj)?;
        if !(smax > 0.0) {
            return Err(Error::invalid("cannot solve with the zero matrix"));
        }
        build_dilation_encoding(adj, smax)
    };
    match choice {
        EncoderChoice::Banded => banded(),
        EncoderChoice::Dilation => dilation(),
        EncoderChoice::Auto => banded().or_else(|e| match e {
            Error::ResourceLimit(_) => dilation(),
            other => Err(other),
        }),
    }
}

/// One-shot solve of `A x = y` with default options and a private memo.
pub fn solve_linear_system(a: &ComplexMatrix, y: &ComplexVector, epsilon: f64, kappa: Option<f64>) -> Result<SolveReport> {
    let opts = SolverOptions { epsilon, kappa, ..SolverOptions::default() };
    PreparedSolver::new(a, &opts, &PhaseMemo::new())?.solve(y)
}
