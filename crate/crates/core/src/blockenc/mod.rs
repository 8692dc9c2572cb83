//! Block encodings `U_A` with `A/α` in the all-ancilla-zero block.
//!
//! A banded matrix is split into data items: constant-value diagonals (a
//! cyclic shift of the matrix register with the wrapped or missing rows
//! deleted) and isolated entries (a shift that keeps a single row). The
//! circuit is the usual linear combination: PREP on the data qubits, one
//! data-controlled shift and delete-flag update per item, then UNPREP.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::numerics::{next_power_of_two, singular_extrema, svd, ComplexMatrix, ZERO};
use crate::statevector::{
    circuit_columns, householder_completion, Circuit, Control, GateOp, RegisterLayout, MAX_UNITARY_QUBITS,
};
use crate::{Error, Result};

mod permutation;

pub use permutation::{build_permutation, induced_permutation, Direction};

/// One term `value · (shift with deleted rows)` of a banded decomposition.
///
/// The item contributes `value` at `(r, (r − shift) mod N)` for every row `r`
/// not in `delete_rows`. Positive shifts sit below the main diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DataItem {
    pub value: Complex64,
    pub shift: i64,
    pub delete_rows: Vec<usize>,
    /// For isolated entries, the single `(row, col)` position kept.
    pub insert_positions: Vec<(usize, usize)>,
}

impl DataItem {
    pub fn is_padding(&self) -> bool {
        self.value == ZERO
    }

    fn kept_rows(&self, dim: usize) -> Vec<usize> {
        let mut deleted = vec![false; dim];
        for &r in &self.delete_rows {
            deleted[r] = true;
        }
        (0..dim).filter(|&r| !deleted[r]).collect()
    }

    fn padding() -> Self {
        Self { value: ZERO, shift: 0, delete_rows: Vec::new(), insert_positions: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandedSpec {
    pub dimension: usize,
    /// Items, zero-padded to a power-of-two count.
    pub items: Vec<DataItem>,
    /// `(ã₂, ã₃)` when the main diagonal was split into a difference item and
    /// a base item.
    pub modified_diagonal: Option<(Complex64, Complex64)>,
}

impl BandedSpec {
    /// Items carrying a nonzero value.
    pub fn active_items(&self) -> impl Iterator<Item = &DataItem> {
        self.items.iter().filter(|i| !i.is_padding())
    }

    /// `Σ |value|`.
    pub fn alpha(&self) -> f64 {
        self.items.iter().map(|i| i.value.norm()).sum()
    }

    /// Number of data qubits, `log2` of the item count.
    pub fn data_qubits(&self) -> usize {
        self.items.len().trailing_zeros() as usize
    }

    /// The matrix the items add up to.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.dimension;
        let mut m = ComplexMatrix::zeros(n, n);
        for item in self.active_items() {
            for r in item.kept_rows(n) {
                m[(r, col_of(r, item.shift, n))] += item.value;
            }
        }
        m
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dimension;
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::invalid("dimension must be a power of two"));
        }
        if !self.items.len().is_power_of_two() {
            return Err(Error::invalid("item count must be a power of two"));
        }
        for item in &self.items {
            if item.shift.unsigned_abs() as usize >= n {
                return Err(Error::invalid("shift exceeds the dimension"));
            }
            if item.delete_rows.iter().any(|&r| r >= n) || item.insert_positions.iter().any(|&(r, c)| r >= n || c >= n) {
                return Err(Error::invalid("item position outside the matrix"));
            }
            if !(item.value.re.is_finite() && item.value.im.is_finite()) {
                return Err(Error::invalid("item value must be finite"));
            }
        }
        Ok(())
    }
}

fn col_of(r: usize, shift: i64, n: usize) -> usize {
    (r as i64 - shift).rem_euclid(n as i64) as usize
}

/// Decomposes a square power-of-two matrix into constant-value diagonals and
/// isolated entries.
///
/// Each diagonal offset is grouped by exact value; groups with two or more
/// entries become shift items, single entries become inserts. Shift items are
/// ordered by column-minus-row offset, inserts by position. A main diagonal
/// holding exactly two distinct values is rewritten as a difference item plus
/// a base item when that lowers `Σ|a_i|`.
pub fn banded_spec_from_matrix(a: &ComplexMatrix) -> Result<BandedSpec> {
    let n = a.rows();
    if !a.is_square() || !n.is_power_of_two() {
        return Err(Error::invalid("banded decomposition needs a square power-of-two matrix"));
    }
    if !a.is_finite() {
        return Err(Error::invalid("matrix entries must be finite"));
    }
    let mut diagonals: Vec<(i64, usize, DataItem)> = Vec::new();
    let mut inserts: Vec<DataItem> = Vec::new();
    let mut modified = None;
    for shift in -(n as i64 - 1)..(n as i64) {
        // (value bits) -> rows, in first-appearance order
        let mut groups: Vec<(Complex64, Vec<usize>)> = Vec::new();
        let mut index: BTreeMap<(u64, u64), usize> = BTreeMap::new();
        for r in 0..n {
            let c = r as i64 - shift;
            if c < 0 || c >= n as i64 {
                continue;
            }
            let v = a[(r, c as usize)];
            if v == ZERO {
                continue;
            }
            let key = (canonical_bits(v.re), canonical_bits(v.im));
            let g = *index.entry(key).or_insert_with(|| {
                groups.push((v, Vec::new()));
                groups.len() - 1
            });
            groups[g].1.push(r);
        }
        if shift == 0 && groups.len() == 2 {
            if let Some((items, pair)) = split_main_diagonal(&groups, n) {
                for item in items {
                    diagonals.push((0, 0, item));
                }
                modified = Some(pair);
                continue;
            }
        }
        for (value, rows) in groups {
            if rows.len() >= 2 {
                let first = rows[0];
                diagonals.push((-shift, first, diagonal_item(value, shift, &rows, n)));
            } else {
                let r = rows[0];
                let c = (r as i64 - shift) as usize;
                let mut item = diagonal_item(value, shift, &rows, n);
                item.insert_positions = vec![(r, c)];
                inserts.push(item);
            }
        }
    }
    // Stable sort keeps the difference item ahead of its base item.
    diagonals.sort_by_key(|(offset, first, _)| (*offset, *first));
    inserts.sort_by_key(|i| i.insert_positions[0]);
    let mut items: Vec<DataItem> = diagonals.into_iter().map(|(_, _, i)| i).chain(inserts).collect();
    if items.is_empty() {
        items.push(DataItem::padding());
    }
    let target = items.len().next_power_of_two();
    items.resize(target, DataItem::padding());
    Ok(BandedSpec { dimension: n, items, modified_diagonal: modified })
}

fn canonical_bits(x: f64) -> u64 {
    if x == 0.0 {
        0
    } else {
        x.to_bits()
    }
}

fn diagonal_item(value: Complex64, shift: i64, rows: &[usize], n: usize) -> DataItem {
    let mut keep = vec![false; n];
    for &r in rows {
        keep[r] = true;
    }
    DataItem { value, shift, delete_rows: (0..n).filter(|&r| !keep[r]).collect(), insert_positions: Vec::new() }
}

/// Candidates for a two-valued main diagonal `u` (rows U), `v` (rows V):
/// as is, `[v−u on V, u on U∪V]`, or `[u−v on U, v on U∪V]`; the first
/// strictly cheaper one wins.
fn split_main_diagonal(groups: &[(Complex64, Vec<usize>)], n: usize) -> Option<(Vec<DataItem>, (Complex64, Complex64))> {
    let (u, ur) = (&groups[0].0, &groups[0].1);
    let (v, vr) = (&groups[1].0, &groups[1].1);
    let mut union: Vec<usize> = ur.iter().chain(vr).copied().collect();
    union.sort_unstable();
    let plain = u.norm() + v.norm();
    let base_u = u.norm() + (v - u).norm();
    let base_v = v.norm() + (u - v).norm();
    if base_u < plain && base_u <= base_v {
        let diff = v - u;
        Some((vec![diagonal_item(diff, 0, vr, n), diagonal_item(*u, 0, &union, n)], (diff, *u)))
    } else if base_v < plain {
        let diff = u - v;
        Some((vec![diagonal_item(diff, 0, ur, n), diagonal_item(*v, 0, &union, n)], (diff, *v)))
    } else {
        None
    }
}

/// Ancilla qubits that must read zero for the encoded block, on both sides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Projector {
    pub zero_qubits: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockEncoding {
    pub circuit: Circuit,
    pub alpha: f64,
    pub layout: RegisterLayout,
    pub row_projector: Projector,
    pub col_projector: Projector,
}

impl BlockEncoding {
    /// Basis indices selected by a projector (ancillas zero), in matrix order.
    pub fn block_indices(&self, projector: &Projector) -> Vec<usize> {
        let total = self.layout.total();
        let mask = projector.zero_qubits.iter().fold(0usize, |m, &q| m | 1 << (total - 1 - q));
        (0..self.layout.dim()).filter(|i| i & mask == 0).collect()
    }
}

/// How deletions of several rows are grouped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeleteGrouping {
    /// One MCX per deleted row (or per kept row, after a blanket flip).
    Never,
    /// Gather power-of-two row sets with a left-ended permutation when that
    /// needs fewer gates.
    #[default]
    WhenCheaper,
    /// Gather every power-of-two row set of size two or more.
    Always,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EncodingOptions {
    pub delete_grouping: DeleteGrouping,
}

pub fn build_block_encoding(spec: &BandedSpec) -> Result<BlockEncoding> {
    build_block_encoding_with(spec, &EncodingOptions::default())
}

pub fn build_block_encoding_with(spec: &BandedSpec, opts: &EncodingOptions) -> Result<BlockEncoding> {
    spec.validate()?;
    let n = spec.dimension.trailing_zeros() as usize;
    let m = spec.data_qubits();
    let layout = RegisterLayout::new(0, m + 1, n)?;
    let alpha = spec.alpha();
    if !(alpha > 0.0) {
        return Err(Error::invalid("cannot encode the zero matrix with banded items"));
    }
    let del = layout.delete_qubit().expect("flag register present");
    let data: Vec<usize> = layout.data_qubits().collect();
    let matrix: Vec<usize> = (m + 1..m + 1 + n).collect();
    let mut circuit = Circuit::new(layout);

    let prep_amps: Vec<Complex64> =
        spec.items.iter().map(|it| Complex64::from_polar((it.value.norm() / alpha).sqrt(), it.value.arg())).collect();
    let unprep_amps: Vec<Complex64> =
        spec.items.iter().map(|it| Complex64::new((it.value.norm() / alpha).sqrt(), 0.0)).collect();
    if m == 0 {
        let phase = prep_amps[0] / prep_amps[0].norm();
        if (phase - Complex64::new(1.0, 0.0)).norm() > 0.0 {
            circuit.push(GateOp::register_unitary(vec![], vec![del], ComplexMatrix::identity(2).scaled(phase))?)?;
        }
    } else {
        let prep = householder_completion(&prep_amps, 1 << m)?;
        circuit.push(GateOp::register_unitary(vec![], data.clone(), prep)?)?;
    }

    let size = spec.dimension;
    for (i, item) in spec.items.iter().enumerate() {
        if item.is_padding() {
            continue;
        }
        let data_ctl: Vec<Control> = data.iter().enumerate().map(|(j, &q)| (q, (i >> (m - 1 - j)) & 1 == 1)).collect();
        let k = item.shift.rem_euclid(size as i64) as usize;
        if k != 0 {
            let map: Vec<usize> = (0..size).map(|c| (c + k) % size).collect();
            circuit.push(GateOp::permutation(data_ctl.clone(), matrix.clone(), map)?)?;
        }
        for g in delete_gates(&item.delete_rows, size, n, &data_ctl, &matrix, del, opts.delete_grouping)? {
            circuit.push(g)?;
        }
    }

    if m > 0 {
        let unprep = householder_completion(&unprep_amps, 1 << m)?;
        circuit.push(GateOp::register_unitary(vec![], data.clone(), unprep.adjoint())?)?;
    }
    let zero_qubits: Vec<usize> = layout.ancillas().collect();
    Ok(BlockEncoding {
        circuit,
        alpha,
        layout,
        row_projector: Projector { zero_qubits: zero_qubits.clone() },
        col_projector: Projector { zero_qubits },
    })
}

fn row_controls(row: usize, matrix: &[usize]) -> Vec<Control> {
    let n = matrix.len();
    matrix.iter().enumerate().map(|(j, &q)| (q, (row >> (n - 1 - j)) & 1 == 1)).collect()
}

/// Gates flipping the delete qubit exactly on `rows` (for the active item).
fn delete_gates(
    rows: &[usize],
    size: usize,
    n: usize,
    data_ctl: &[Control],
    matrix: &[usize],
    del: usize,
    grouping: DeleteGrouping,
) -> Result<Vec<GateOp>> {
    let mcx_row = |r: usize| GateOp::mcx(data_ctl.iter().copied().chain(row_controls(r, matrix)).collect(), del);
    let direct = rows.len();
    let complement = 1 + size - rows.len();
    let grouped = if rows.len() >= 2 && rows.len().is_power_of_two() && grouping != DeleteGrouping::Never {
        let perm = build_permutation(rows, Direction::Left, n)?;
        let cost = 2 * perm.len() + 1;
        let use_it = grouping == DeleteGrouping::Always || cost < direct.min(complement);
        use_it.then_some(perm)
    } else {
        None
    };
    let mut out = Vec::new();
    if let Some(perm) = grouped {
        let remap = |g: &GateOp| g.remapped(|q| matrix[q]);
        let k = rows.len().trailing_zeros() as usize;
        let top: Vec<Control> = matrix[..n - k].iter().map(|&q| (q, true)).collect();
        out.extend(perm.iter().map(remap));
        out.push(GateOp::mcx(data_ctl.iter().copied().chain(top).collect(), del)?);
        out.extend(perm.iter().rev().map(|g| remap(&g.inverse())));
    } else if complement < direct {
        out.push(GateOp::mcx(data_ctl.to_vec(), del)?);
        let mut deleted = vec![false; size];
        for &r in rows {
            deleted[r] = true;
        }
        for r in (0..size).filter(|&r| !deleted[r]) {
            out.push(mcx_row(r)?);
        }
    } else {
        for &r in rows {
            out.push(mcx_row(r)?);
        }
    }
    Ok(out)
}

/// The `[[Ā, √(I−ĀĀ†)], [√(I−Ā†Ā), −Ā†]]` dilation of `Ā = A/α` as a single
/// register unitary, flag qubit first.
pub fn build_dilation_encoding(a: &ComplexMatrix, alpha: f64) -> Result<BlockEncoding> {
    let size = a.rows();
    if !a.is_square() || !size.is_power_of_two() {
        return Err(Error::invalid("dilation needs a square power-of-two matrix"));
    }
    let (smax, _) = singular_extrema(a)?;
    if !(alpha > 0.0) || smax > alpha * (1.0 + 1e-12) {
        return Err(Error::invalid("alpha is below the spectral norm"));
    }
    let abar = a.scaled_real(1.0 / alpha);
    let s = svd(&abar)?;
    let root = |x: f64| Complex64::new((1.0 - x * x).max(0.0).sqrt(), 0.0);
    let d: Vec<Complex64> = s.singular_values.iter().map(|&x| root(x)).collect();
    let dm = ComplexMatrix::diagonal(&d);
    let top_right = s.left_vectors.matmul(&dm).matmul(&s.left_vectors.adjoint());
    let bottom_left = s.right_vectors.matmul(&dm).matmul(&s.right_vectors.adjoint());
    let mut u = ComplexMatrix::zeros(2 * size, 2 * size);
    u.set_block(0, 0, &abar);
    u.set_block(0, size, &top_right);
    u.set_block(size, 0, &bottom_left);
    u.set_block(size, size, &abar.adjoint().scaled_real(-1.0));
    let n = size.trailing_zeros() as usize;
    let layout = RegisterLayout::new(0, 1, n)?;
    let mut circuit = Circuit::new(layout);
    circuit.push(GateOp::register_unitary(vec![], (0..=n).collect(), u)?)?;
    Ok(BlockEncoding {
        circuit,
        alpha,
        layout,
        row_projector: Projector { zero_qubits: vec![0] },
        col_projector: Projector { zero_qubits: vec![0] },
    })
}

/// `Π̃ U Π`: the encoded block `A/α`.
pub fn extract_block(enc: &BlockEncoding) -> Result<ComplexMatrix> {
    if enc.layout.total() > MAX_UNITARY_QUBITS {
        return Err(Error::resource("block extraction limited to 12 qubits"));
    }
    let cols = enc.block_indices(&enc.col_projector);
    let rows = enc.block_indices(&enc.row_projector);
    let full = circuit_columns(&enc.circuit, &cols)?;
    Ok(ComplexMatrix::from_fn(rows.len(), cols.len(), |r, c| full[(rows[r], c)]))
}

/// Zero-pads a square matrix to the next power-of-two dimension (at least 2).
pub fn pad_to_power_of_two(a: &ComplexMatrix) -> ComplexMatrix {
    let (p, _) = next_power_of_two(a.rows().max(a.cols()));
    a.padded(p, p)
}
