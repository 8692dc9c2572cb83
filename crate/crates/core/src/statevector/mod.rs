//! State-vector simulator over the QSP / flag / matrix register layout.
//!
//! Qubit 0 is the most significant bit of a basis index. The QSP qubit (if
//! any) comes first, then the flag register (data qubits, then the delete
//! qubit), then the matrix register.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::numerics::{ComplexMatrix, ComplexVector, ONE, ZERO};
use crate::{Error, Result};

mod gate;

pub use gate::{Control, GateKind, GateOp, UNITARY_TOL};

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 16;
/// Largest register for which full unitaries are materialized.
pub const MAX_UNITARY_QUBITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RegisterLayout {
    n_qsp: usize,
    n_flag: usize,
    n_matrix: usize,
}

/// Names one of the three registers, or the whole layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegisterId {
    Qsp,
    Flag,
    Matrix,
    All,
}

impl RegisterLayout {
    pub fn new(n_qsp: usize, n_flag: usize, n_matrix: usize) -> Result<Self> {
        if n_qsp > 1 {
            return Err(Error::invalid("at most one QSP qubit"));
        }
        let total = n_qsp + n_flag + n_matrix;
        if total == 0 {
            return Err(Error::invalid("layout has no qubits"));
        }
        if total > MAX_QUBITS {
            return Err(Error::resource(alloc::format!("{total} qubits exceeds the cap of {MAX_QUBITS}")));
        }
        Ok(Self { n_qsp, n_flag, n_matrix })
    }

    pub fn n_qsp(&self) -> usize {
        self.n_qsp
    }

    pub fn n_flag(&self) -> usize {
        self.n_flag
    }

    pub fn n_matrix(&self) -> usize {
        self.n_matrix
    }

    pub fn total(&self) -> usize {
        self.n_qsp + self.n_flag + self.n_matrix
    }

    pub fn dim(&self) -> usize {
        1 << self.total()
    }

    pub fn register(&self, id: RegisterId) -> Range<usize> {
        match id {
            RegisterId::Qsp => 0..self.n_qsp,
            RegisterId::Flag => self.n_qsp..self.n_qsp + self.n_flag,
            RegisterId::Matrix => self.n_qsp + self.n_flag..self.total(),
            RegisterId::All => 0..self.total(),
        }
    }

    /// All qubits outside the matrix register.
    pub fn ancillas(&self) -> Range<usize> {
        0..self.n_qsp + self.n_flag
    }

    /// The delete qubit: last qubit of the flag register.
    pub fn delete_qubit(&self) -> Option<usize> {
        (self.n_flag > 0).then(|| self.n_qsp + self.n_flag - 1)
    }

    /// The data qubits: the flag register minus the delete qubit.
    pub fn data_qubits(&self) -> Range<usize> {
        self.n_qsp..self.n_qsp + self.n_flag.saturating_sub(1)
    }

    /// The same layout with one QSP qubit prepended.
    pub fn with_qsp(&self) -> Result<Self> {
        Self::new(1, self.n_flag, self.n_matrix)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    layout: RegisterLayout,
    amplitudes: ComplexVector,
}

impl QuantumState {
    /// `|0…0⟩`.
    pub fn zero(layout: RegisterLayout) -> Self {
        Self { layout, amplitudes: ComplexVector::basis(layout.dim(), 0) }
    }

    pub fn basis(layout: RegisterLayout, index: usize) -> Result<Self> {
        if index >= layout.dim() {
            return Err(Error::invalid("basis index out of range"));
        }
        Ok(Self { layout, amplitudes: ComplexVector::basis(layout.dim(), index) })
    }

    /// Wraps amplitudes that must already be normalized within 1e-10.
    pub fn from_amplitudes(layout: RegisterLayout, amplitudes: ComplexVector) -> Result<Self> {
        if amplitudes.dim() != layout.dim() {
            return Err(Error::invalid("amplitude count does not match the layout"));
        }
        if (amplitudes.norm() - 1.0).abs() > 1e-10 {
            return Err(Error::invalid("state is not normalized"));
        }
        Ok(Self { layout, amplitudes })
    }

    pub fn layout(&self) -> RegisterLayout {
        self.layout
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> ComplexVector {
        self.amplitudes
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    layout: RegisterLayout,
    gates: Vec<GateOp>,
}

impl Circuit {
    pub fn new(layout: RegisterLayout) -> Self {
        Self { layout, gates: Vec::new() }
    }

    pub fn layout(&self) -> RegisterLayout {
        self.layout
    }

    pub fn gates(&self) -> &[GateOp] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: GateOp) -> Result<()> {
        if gate.qubits().iter().any(|&q| q >= self.layout.total()) {
            return Err(Error::invalid("gate references a qubit outside the layout"));
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, other: &Circuit) -> Result<()> {
        if other.layout.total() != self.layout.total() {
            return Err(Error::invalid("cannot concatenate circuits of different width"));
        }
        self.gates.extend(other.gates.iter().cloned());
        Ok(())
    }

    pub fn inverse(&self) -> Self {
        Self { layout: self.layout, gates: self.gates.iter().rev().map(GateOp::inverse).collect() }
    }

    /// Re-hosts the circuit in a wider `layout`, shifting every qubit index by
    /// `offset`.
    pub fn embedded(&self, layout: RegisterLayout, offset: usize) -> Result<Self> {
        let mut out = Self::new(layout);
        for g in &self.gates {
            out.push(g.remapped(|q| q + offset))?;
        }
        Ok(out)
    }

    /// Applies the gates to raw amplitudes in place.
    pub fn apply_in_place(&self, amps: &mut [Complex64]) {
        let total = self.layout.total();
        for g in &self.gates {
            g.apply(amps, total);
        }
    }
}

pub fn apply_circuit(state: &QuantumState, circuit: &Circuit) -> Result<QuantumState> {
    if state.layout != circuit.layout {
        return Err(Error::invalid("state and circuit layouts differ"));
    }
    let mut amps = state.amplitudes.clone();
    circuit.apply_in_place(amps.as_mut_slice());
    Ok(QuantumState { layout: state.layout, amplitudes: amps })
}

/// Unitary whose first column is `u/||u||` (zero-padded to `dim`), completed
/// by a phased Householder reflection.
pub fn householder_completion(u: &[Complex64], dim: usize) -> Result<ComplexMatrix> {
    if u.len() > dim {
        return Err(Error::invalid("vector longer than the target register"));
    }
    let norm = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::invalid("cannot prepare the zero vector"));
    }
    let mut unit: Vec<Complex64> = u.iter().map(|z| z / norm).collect();
    unit.resize(dim, ZERO);
    let theta = if unit[0].norm() > 0.0 { unit[0].arg() } else { 0.0 };
    let rot = Complex64::from_polar(1.0, -theta);
    // w = e1 − e^{−iθ}u
    let w: Vec<Complex64> = unit.iter().enumerate().map(|(i, z)| if i == 0 { ONE } else { ZERO } - z * rot).collect();
    let ww: f64 = w.iter().map(|z| z.norm_sqr()).sum();
    let global = Complex64::from_polar(1.0, theta);
    let mut h = ComplexMatrix::identity(dim);
    if ww > 1e-30 {
        for r in 0..dim {
            for c in 0..dim {
                h[(r, c)] -= w[r] * w[c].conj() * (2.0 / ww);
            }
        }
    }
    let mut q = h.scaled(global);
    // Pin the first column exactly.
    q.set_column(0, &unit);
    Ok(q)
}

/// Circuit preparing `v/||v||` on the `target` register from `|0…0⟩`.
pub fn prepare_state(v: &ComplexVector, layout: RegisterLayout, target: RegisterId) -> Result<Circuit> {
    let qubits: Vec<usize> = layout.register(target).collect();
    if qubits.is_empty() {
        return Err(Error::invalid("target register is empty"));
    }
    let dim = 1usize << qubits.len();
    if v.dim() > dim {
        return Err(Error::invalid("vector does not fit in the target register"));
    }
    let q = householder_completion(v.as_slice(), dim)?;
    let mut c = Circuit::new(layout);
    c.push(GateOp::register_unitary(vec![], qubits, q)?)?;
    Ok(c)
}

/// Full unitary of the gate product (column `j` is the image of `|j⟩`).
pub fn circuit_unitary(circuit: &Circuit) -> Result<ComplexMatrix> {
    let total = circuit.layout.total();
    if total > MAX_UNITARY_QUBITS {
        return Err(Error::resource(alloc::format!(
            "unitary extraction limited to {MAX_UNITARY_QUBITS} qubits, circuit has {total}"
        )));
    }
    let cols: Vec<usize> = (0..circuit.layout.dim()).collect();
    circuit_columns(circuit, &cols)
}

/// The listed columns of the circuit unitary, as a `dim x cols.len()` matrix.
pub fn circuit_columns(circuit: &Circuit, cols: &[usize]) -> Result<ComplexMatrix> {
    let dim = circuit.layout.dim();
    if cols.iter().any(|&c| c >= dim) {
        return Err(Error::invalid("column index out of range"));
    }
    let mut out = ComplexMatrix::zeros(dim, cols.len());
    let mut amps = vec![ZERO; dim];
    for (k, &c) in cols.iter().enumerate() {
        amps.iter_mut().for_each(|z| *z = ZERO);
        amps[c] = ONE;
        circuit.apply_in_place(&mut amps);
        out.set_column(k, &amps);
    }
    Ok(out)
}

fn selection_masks(layout: RegisterLayout, qubits: &[usize], outcome: &[bool]) -> Result<(usize, usize)> {
    if qubits.len() != outcome.len() {
        return Err(Error::invalid("qubit and outcome lists differ in length"));
    }
    let total = layout.total();
    let mut mask = 0;
    let mut value = 0;
    for (&q, &o) in qubits.iter().zip(outcome) {
        if q >= total {
            return Err(Error::invalid("post-selected qubit outside the layout"));
        }
        let b = 1usize << (total - 1 - q);
        if mask & b != 0 {
            return Err(Error::invalid("qubit listed twice"));
        }
        mask |= b;
        if o {
            value |= b;
        }
    }
    Ok((mask, value))
}

/// Squared norm of the amplitudes whose `qubits` read `outcome`.
pub fn slice_probability(state: &QuantumState, qubits: &[usize], outcome: &[bool]) -> Result<f64> {
    let (mask, value) = selection_masks(state.layout, qubits, outcome)?;
    Ok(state.amplitudes.iter().enumerate().filter(|(i, _)| i & mask == value).map(|(_, z)| z.norm_sqr()).sum())
}

/// Projects onto `qubits = outcome` and renormalizes.
pub fn postselect(state: &QuantumState, qubits: &[usize], outcome: &[bool]) -> Result<(QuantumState, f64)> {
    let (mask, value) = selection_masks(state.layout, qubits, outcome)?;
    let p = slice_probability(state, qubits, outcome)?;
    if !(p > 0.0) {
        return Err(Error::PostSelection { probability: p });
    }
    let s = 1.0 / p.sqrt();
    let entries: Vec<Complex64> =
        state.amplitudes.iter().enumerate().map(|(i, z)| if i & mask == value { z * s } else { ZERO }).collect();
    Ok((QuantumState { layout: state.layout, amplitudes: ComplexVector::new(entries)? }, p))
}

/// Bitstring of a basis index, qubit 0 first.
pub fn bitstring(index: usize, total: usize) -> String {
    (0..total).map(|q| if (index >> (total - 1 - q)) & 1 == 1 { '1' } else { '0' }).collect()
}

/// Seeded multinomial sample of measurement outcomes in the computational basis.
pub fn sample_counts(state: &QuantumState, shots: usize, seed: u64) -> Result<BTreeMap<String, usize>> {
    if shots == 0 {
        return Err(Error::invalid("shots must be at least 1"));
    }
    let mut cdf = Vec::with_capacity(state.layout.dim());
    let mut acc = 0.0;
    for z in state.amplitudes.iter() {
        acc += z.norm_sqr();
        cdf.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = vec![0usize; cdf.len()];
    for _ in 0..shots {
        let u = rng.gen::<f64>() * acc;
        let idx = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
        hits[idx] += 1;
    }
    let total = state.layout.total();
    Ok(hits.iter().enumerate().filter(|(_, &h)| h > 0).map(|(i, &h)| (bitstring(i, total), h)).collect())
}

/// `⟨ψ|M|ψ⟩`.
pub fn expectation(state: &QuantumState, m: &ComplexMatrix) -> Result<Complex64> {
    if m.rows() != state.layout.dim() || m.cols() != state.layout.dim() {
        return Err(Error::invalid("observable dimension mismatch"));
    }
    let mv = m.mul_vec(&state.amplitudes)?;
    Ok(state.amplitudes.inner(&mv))
}
