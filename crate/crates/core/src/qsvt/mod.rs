//! QSVT circuits over a block encoding and the end-to-end linear solver.
//!
//! The operator is `Π_{φ_0} X_1 Π_{φ_1} X_2 ⋯ X_d Π_{φ_d}` with
//! `X_j = U_A` when `d − j` is even and `U_A†` otherwise, each
//! `Π_φ = e^{iφ(2Π − I)}` realized by an MCX from the flag-zero subspace onto
//! the QSP qubit around a Z rotation. The QSP qubit also carries an
//! `e^{i(dπ/2)Z}` correction, so the branch with the QSP qubit in `|0⟩`
//! applies the W_X polynomial `P` and the `|1⟩` branch applies `conj(P)`.
//! With Hadamards around the whole thing, post-selecting the QSP qubit on
//! `|0⟩` leaves `Re P` applied to the singular values.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use crate::blockenc::BlockEncoding;
use crate::invpoly::{Convention, PhaseSequence};
use crate::numerics::{svd, ComplexMatrix};
use crate::statevector::{circuit_columns, Circuit, GateOp, MAX_UNITARY_QUBITS};
use crate::{Error, Result};

mod solver;

pub use solver::{
    calibrate_beta, solve_linear_system, EncoderChoice, PhaseMemo, PhaseSource, PreparedSolver, SolveReport,
    SolverOptions, DEFAULT_KAPPA_LADDER,
};

#[derive(Debug, Clone, PartialEq)]
pub struct QsvtConfig {
    /// Encoding of the matrix whose singular values are transformed.
    pub encoding: BlockEncoding,
    /// Reflection-convention phases.
    pub phases: PhaseSequence,
    pub real_part: bool,
}

impl QsvtConfig {
    fn check(&self) -> Result<()> {
        if self.phases.convention() != Convention::Reflection {
            return Err(Error::invalid("QSVT needs reflection-convention phases"));
        }
        if self.encoding.layout.n_qsp() != 0 {
            return Err(Error::invalid("encoding must not already use a QSP qubit"));
        }
        if self.encoding.row_projector != self.encoding.col_projector {
            return Err(Error::invalid("only square projectors are supported"));
        }
        Ok(())
    }
}

/// Builds the QSVT circuit on the encoding's layout with a QSP qubit prepended.
pub fn assemble_qsvt_circuit(config: &QsvtConfig) -> Result<Circuit> {
    config.check()?;
    let enc = &config.encoding;
    let layout = enc.layout.with_qsp()?;
    let qsp = 0;
    let u = enc.circuit.embedded(layout, 1)?;
    let u_dag = u.inverse();
    let flag_zero: Vec<(usize, bool)> = enc.row_projector.zero_qubits.iter().map(|&q| (q + 1, false)).collect();
    let phases = config.phases.phases();
    let d = config.phases.degree();

    let mut c = Circuit::new(layout);
    if config.real_part {
        c.push(GateOp::h(qsp))?;
    }
    c.push(GateOp::phase_z(qsp, d as f64 * FRAC_PI_2))?;
    // Time order is right to left in the operator product.
    for j in (0..=d).rev() {
        push_projector_phase(&mut c, &flag_zero, qsp, phases[j])?;
        if j >= 1 {
            let x = if (d - j) % 2 == 0 { &u } else { &u_dag };
            c.extend(x)?;
        }
    }
    if config.real_part {
        c.push(GateOp::h(qsp))?;
    }
    Ok(c)
}

fn push_projector_phase(c: &mut Circuit, flag_zero: &[(usize, bool)], qsp: usize, phi: f64) -> Result<()> {
    let flip = GateOp::mcx(flag_zero.to_vec(), qsp)?;
    c.push(flip.clone())?;
    c.push(GateOp::phase_z(qsp, -phi))?;
    c.push(flip)
}

/// The QSP-and-flag-zero block of the assembled circuit.
pub fn qsvt_block(config: &QsvtConfig) -> Result<ComplexMatrix> {
    let circuit = assemble_qsvt_circuit(config)?;
    let layout = circuit.layout();
    if layout.total() > MAX_UNITARY_QUBITS {
        return Err(Error::resource("QSVT block extraction limited to 12 qubits"));
    }
    let idx = config.encoding.block_indices(&config.encoding.col_projector);
    // With the QSP qubit in front, the zero-QSP indices are unchanged.
    let cols = circuit_columns(&circuit, &idx)?;
    Ok(ComplexMatrix::from_fn(idx.len(), idx.len(), |r, c| cols[(idx[r], c)]))
}

/// Dense reference: with `M = L Σ R†`, returns `L f(Σ) R†` for odd `degree`
/// and `R f(Σ) R†` for even `degree`.
pub fn svd_transform(m: &ComplexMatrix, degree: usize, f: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::invalid("singular value transform needs a square matrix"));
    }
    let s = svd(m)?;
    let vals: Vec<num_complex::Complex64> =
        s.singular_values.iter().map(|&x| num_complex::Complex64::new(f(x), 0.0)).collect();
    let dm = ComplexMatrix::diagonal(&vals);
    let left = if degree % 2 == 1 { &s.left_vectors } else { &s.right_vectors };
    Ok(left.matmul(&dm).matmul(&s.right_vectors.adjoint()))
}
