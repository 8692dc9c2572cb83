use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::numerics::{ComplexMatrix, ONE, ZERO};
use crate::{Error, Result};

/// Tolerance for unitarity of embedded matrices.
pub const UNITARY_TOL: f64 = 1e-12;

/// A control qubit together with the value it must hold.
pub type Control = (usize, bool);

/// The gate variants understood by the simulator.
///
/// Register-valued gates list their qubits most-significant first, so local
/// index `l` has bit `k-1-j` equal to the state of `qubits[j]`.
#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    Single { target: usize, matrix: [[Complex64; 2]; 2] },
    Mcx { controls: Vec<Control>, target: usize },
    Permutation { controls: Vec<Control>, qubits: Vec<usize>, map: Vec<usize> },
    RegisterUnitary { controls: Vec<Control>, qubits: Vec<usize>, matrix: ComplexMatrix },
}

/// A validated gate.
#[derive(Debug, Clone, PartialEq)]
pub struct GateOp {
    kind: GateKind,
}

impl GateOp {
    /// Validates `kind`: unitary matrices, bijective maps, distinct qubits.
    pub fn new(kind: GateKind) -> Result<Self> {
        match &kind {
            GateKind::Single { matrix, .. } => {
                let m = ComplexMatrix::from_fn(2, 2, |r, c| matrix[r][c]);
                if !m.is_finite() || m.orthonormality_error() > UNITARY_TOL {
                    return Err(Error::invalid("single-qubit matrix is not unitary"));
                }
            }
            GateKind::Mcx { .. } => {}
            GateKind::Permutation { qubits, map, .. } => {
                if map.len() != 1usize << qubits.len() {
                    return Err(Error::invalid("permutation map has the wrong length"));
                }
                let mut seen = vec![false; map.len()];
                for &t in map {
                    if t >= map.len() || seen[t] {
                        return Err(Error::invalid("permutation map is not a bijection"));
                    }
                    seen[t] = true;
                }
            }
            GateKind::RegisterUnitary { qubits, matrix, .. } => {
                let n = 1usize << qubits.len();
                if matrix.rows() != n || matrix.cols() != n {
                    return Err(Error::invalid("register unitary has the wrong size"));
                }
                if !matrix.is_finite() || matrix.orthonormality_error() > UNITARY_TOL {
                    return Err(Error::invalid("register matrix is not unitary"));
                }
            }
        }
        let gate = Self { kind };
        let qs = gate.qubits();
        for (i, q) in qs.iter().enumerate() {
            if qs[..i].contains(q) {
                return Err(Error::invalid("gate uses a qubit twice"));
            }
        }
        Ok(gate)
    }

    pub fn single(target: usize, matrix: [[Complex64; 2]; 2]) -> Result<Self> {
        Self::new(GateKind::Single { target, matrix })
    }

    pub fn x(target: usize) -> Self {
        Self { kind: GateKind::Single { target, matrix: [[ZERO, ONE], [ONE, ZERO]] } }
    }

    pub fn z(target: usize) -> Self {
        Self { kind: GateKind::Single { target, matrix: [[ONE, ZERO], [ZERO, -ONE]] } }
    }

    pub fn h(target: usize) -> Self {
        let s = Complex64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self { kind: GateKind::Single { target, matrix: [[s, s], [s, -s]] } }
    }

    /// `diag(e^{iθ}, e^{−iθ})`, i.e. `e^{iθZ}`.
    pub fn phase_z(target: usize, theta: f64) -> Self {
        let e = Complex64::from_polar(1.0, theta);
        Self { kind: GateKind::Single { target, matrix: [[e, ZERO], [ZERO, e.conj()]] } }
    }

    pub fn mcx(controls: Vec<Control>, target: usize) -> Result<Self> {
        Self::new(GateKind::Mcx { controls, target })
    }

    pub fn permutation(controls: Vec<Control>, qubits: Vec<usize>, map: Vec<usize>) -> Result<Self> {
        Self::new(GateKind::Permutation { controls, qubits, map })
    }

    pub fn register_unitary(controls: Vec<Control>, qubits: Vec<usize>, matrix: ComplexMatrix) -> Result<Self> {
        Self::new(GateKind::RegisterUnitary { controls, qubits, matrix })
    }

    pub fn kind(&self) -> &GateKind {
        &self.kind
    }

    /// Every qubit the gate touches, controls included.
    pub fn qubits(&self) -> Vec<usize> {
        match &self.kind {
            GateKind::Single { target, .. } => vec![*target],
            GateKind::Mcx { controls, target } => controls.iter().map(|c| c.0).chain([*target]).collect(),
            GateKind::Permutation { controls, qubits, .. } | GateKind::RegisterUnitary { controls, qubits, .. } => {
                controls.iter().map(|c| c.0).chain(qubits.iter().copied()).collect()
            }
        }
    }

    pub fn inverse(&self) -> Self {
        let kind = match &self.kind {
            GateKind::Single { target, matrix } => GateKind::Single {
                target: *target,
                matrix: [[matrix[0][0].conj(), matrix[1][0].conj()], [matrix[0][1].conj(), matrix[1][1].conj()]],
            },
            GateKind::Mcx { .. } => self.kind.clone(),
            GateKind::Permutation { controls, qubits, map } => {
                let mut inv = vec![0; map.len()];
                for (i, &t) in map.iter().enumerate() {
                    inv[t] = i;
                }
                GateKind::Permutation { controls: controls.clone(), qubits: qubits.clone(), map: inv }
            }
            GateKind::RegisterUnitary { controls, qubits, matrix } => {
                GateKind::RegisterUnitary { controls: controls.clone(), qubits: qubits.clone(), matrix: matrix.adjoint() }
            }
        };
        Self { kind }
    }

    /// Renumbers every qubit through `f`.
    pub fn remapped(&self, f: impl Fn(usize) -> usize) -> Self {
        let ctl = |cs: &[Control]| cs.iter().map(|&(q, v)| (f(q), v)).collect::<Vec<_>>();
        let kind = match &self.kind {
            GateKind::Single { target, matrix } => GateKind::Single { target: f(*target), matrix: *matrix },
            GateKind::Mcx { controls, target } => GateKind::Mcx { controls: ctl(controls), target: f(*target) },
            GateKind::Permutation { controls, qubits, map } => GateKind::Permutation {
                controls: ctl(controls),
                qubits: qubits.iter().map(|&q| f(q)).collect(),
                map: map.clone(),
            },
            GateKind::RegisterUnitary { controls, qubits, matrix } => GateKind::RegisterUnitary {
                controls: ctl(controls),
                qubits: qubits.iter().map(|&q| f(q)).collect(),
                matrix: matrix.clone(),
            },
        };
        Self { kind }
    }

    /// Adds extra controls (used to condition a whole sub-circuit).
    pub fn with_controls(&self, extra: &[Control]) -> Result<Self> {
        let kind = match &self.kind {
            GateKind::Single { target, matrix } => GateKind::RegisterUnitary {
                controls: extra.to_vec(),
                qubits: vec![*target],
                matrix: ComplexMatrix::from_fn(2, 2, |r, c| matrix[r][c]),
            },
            GateKind::Mcx { controls, target } => {
                GateKind::Mcx { controls: controls.iter().chain(extra).copied().collect(), target: *target }
            }
            GateKind::Permutation { controls, qubits, map } => GateKind::Permutation {
                controls: controls.iter().chain(extra).copied().collect(),
                qubits: qubits.clone(),
                map: map.clone(),
            },
            GateKind::RegisterUnitary { controls, qubits, matrix } => GateKind::RegisterUnitary {
                controls: controls.iter().chain(extra).copied().collect(),
                qubits: qubits.clone(),
                matrix: matrix.clone(),
            },
        };
        Self::new(kind)
    }

    /// Applies the gate in place to amplitudes over `total` qubits.
    pub(crate) fn apply(&self, amps: &mut [Complex64], total: usize) {
        let bit = |q: usize| 1usize << (total - 1 - q);
        let control_masks = |cs: &[Control]| {
            cs.iter().fold((0usize, 0usize), |(m, v), &(q, on)| (m | bit(q), if on { v | bit(q) } else { v }))
        };
        match &self.kind {
            GateKind::Single { target, matrix } => {
                let t = bit(*target);
                let free = (amps.len() - 1) & !t;
                for_each_subset(free, |i| {
                    let (a, b) = (amps[i], amps[i | t]);
                    amps[i] = matrix[0][0] * a + matrix[0][1] * b;
                    amps[i | t] = matrix[1][0] * a + matrix[1][1] * b;
                });
            }
            GateKind::Mcx { controls, target } => {
                let t = bit(*target);
                let (cm, cv) = control_masks(controls);
                let free = (amps.len() - 1) & !t & !cm;
                for_each_subset(free, |s| {
                    let i = s | cv;
                    amps.swap(i, i | t);
                });
            }
            GateKind::Permutation { controls, qubits, map } => {
                let (cm, cv) = control_masks(controls);
                let offsets = local_offsets(qubits, total);
                let reg_mask = qubits.iter().fold(0, |m, &q| m | bit(q));
                let free = (amps.len() - 1) & !reg_mask & !cm;
                let mut buf = vec![ZERO; offsets.len()];
                for_each_subset(free, |s| {
                    let base = s | cv;
                    for (l, off) in offsets.iter().enumerate() {
                        buf[l] = amps[base | off];
                    }
                    for (l, &t) in map.iter().enumerate() {
                        amps[base | offsets[t]] = buf[l];
                    }
                });
            }
            GateKind::RegisterUnitary { controls, qubits, matrix } => {
                let (cm, cv) = control_masks(controls);
                let offsets = local_offsets(qubits, total);
                let reg_mask = qubits.iter().fold(0, |m, &q| m | bit(q));
                let free = (amps.len() - 1) & !reg_mask & !cm;
                let n = offsets.len();
                let mut buf = vec![ZERO; n];
                let data = matrix.as_slice();
                for_each_subset(free, |s| {
                    let base = s | cv;
                    for (l, off) in offsets.iter().enumerate() {
                        buf[l] = amps[base | off];
                    }
                    for r in 0..n {
                        let row = &data[r * n..(r + 1) * n];
                        amps[base | offsets[r]] = row.iter().zip(&buf).map(|(a, b)| a * b).sum();
                    }
                });
            }
        }
    }
}

/// Global index offsets of each local register index.
fn local_offsets(qubits: &[usize], total: usize) -> Vec<usize> {
    let k = qubits.len();
    (0..1usize << k)
        .map(|l| {
            qubits.iter().enumerate().fold(0, |acc, (j, &q)| {
                if (l >> (k - 1 - j)) & 1 == 1 {
                    acc | (1usize << (total - 1 - q))
                } else {
                    acc
                }
            })
        })
        .collect()
}

/// Calls `f` on every submask of `free`, starting from zero.
fn for_each_subset(free: usize, mut f: impl FnMut(usize)) {
    let mut cur = 0usize;
    loop {
        f(cur);
        cur = (cur | !free).wrapping_add(1) & free;
        if cur == 0 {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_cover_mask() {
        let mut seen = Vec::new();
        for_each_subset(0b1010, |s| seen.push(s));
        assert_eq!(seen, [0b0000, 0b0010, 0b1000, 0b1010]);
        let mut n = 0;
        for_each_subset(0, |_| n += 1);
        assert_eq!(n, 1);
    }

    #[test]
    fn rejects_bad_gates() {
        let bad = [[ONE, ONE], [ZERO, ONE]];
        assert!(GateOp::single(0, bad).is_err());
        assert!(GateOp::permutation(vec![], vec![0], vec![0, 0]).is_err());
        assert!(GateOp::mcx(vec![(1, true)], 1).is_err());
    }

    #[test]
    fn inverse_of_permutation() {
        let g = GateOp::permutation(vec![], vec![0, 1], vec![1, 2, 3, 0]).unwrap();
        let mut amps: Vec<Complex64> = (0..4).map(|i| Complex64::new(i as f64, 0.0)).collect();
        let orig = amps.clone();
        g.apply(&mut amps, 2);
        assert_eq!(amps[1], orig[0]);
        g.inverse().apply(&mut amps, 2);
        assert_eq!(amps, orig);
    }
}
