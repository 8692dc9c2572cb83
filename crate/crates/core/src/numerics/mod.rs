//! Dense complex linear algebra and curve fitting.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::{Error, Result};

mod fit;
mod linsolve;
mod svd;

pub use fit::{fit_double_exponential, fit_double_exponential_with, DoubleExpFit, FitWeighting};
pub use linsolve::solve_real;
pub use svd::{pseudoinverse_solve, singular_extrema, svd, SvdResult, RANK_THRESHOLD};

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A dense complex column vector.
#[derive(Clone, PartialEq)]
pub struct ComplexVector {
    entries: Vec<Complex64>,
}

impl ComplexVector {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("vector must have at least one entry"));
        }
        if !entries.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::invalid("vector entries must be finite"));
        }
        Ok(Self { entries })
    }

    pub fn zeros(dim: usize) -> Self {
        Self { entries: vec![ZERO; dim.max(1)] }
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.entries[index] = ONE;
        v
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.entries
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.entries
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Complex64> {
        self.entries.iter()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self { entries: self.entries.iter().map(|z| z * s).collect() }
    }

    /// ⟨self|other⟩ with the conjugate on `self`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.entries.iter().zip(&other.entries).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect(),
        }
    }

    /// Zero-pads (or truncates) to `dim` entries.
    pub fn resized(&self, dim: usize) -> Self {
        let mut entries = self.entries.clone();
        entries.resize(dim.max(1), ZERO);
        Self { entries }
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let mut entries = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.entries {
            for b in &other.entries {
                entries.push(a * b);
            }
        }
        Self { entries }
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Index<usize> for ComplexVector {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.entries[i]
    }
}

impl IndexMut<usize> for ComplexVector {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.entries[i]
    }
}

impl fmt::Debug for ComplexVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.entries.iter()).finish()
    }
}

/// A dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries, checking shape and finiteness.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("matrix dimensions must be positive"));
        }
        if data.len() != rows * cols {
            return Err(Error::invalid("entry count does not match rows * cols"));
        }
        let m = Self { rows, cols, data };
        if !m.is_finite() {
            return Err(Error::invalid("matrix entries must be finite"));
        }
        Ok(m)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::invalid("ragged rows"));
        }
        let data = rows.iter().flat_map(|r| r.iter().map(|&x| Complex64::new(x, 0.0))).collect();
        Self::new(rows.len(), cols, data)
    }

    pub fn diagonal(values: &[Complex64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn column(&self, c: usize) -> ComplexVector {
        ComplexVector { entries: (0..self.rows).map(|r| self[(r, c)]).collect() }
    }

    pub fn set_column(&mut self, c: usize, v: &[Complex64]) {
        for (r, z) in v.iter().enumerate().take(self.rows) {
            self[(r, c)] = *z;
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scaled_real(&self, s: f64) -> Self {
        self.scaled(Complex64::new(s, 0.0))
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &ComplexVector) -> Result<ComplexVector> {
        if v.dim() != self.cols {
            return Err(Error::invalid("matrix-vector dimension mismatch"));
        }
        let entries = (0..self.rows)
            .map(|r| self.data[r * self.cols..(r + 1) * self.cols].iter().zip(v.iter()).map(|(a, b)| a * b).sum())
            .collect();
        Ok(ComplexVector { entries })
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        Self::from_fn(self.rows * other.rows, self.cols * other.cols, |r, c| {
            self[(r / other.rows, c / other.cols)] * other[(r % other.rows, c % other.cols)]
        })
    }

    /// Embeds `self` as the top-left block of a `rows x cols` zero matrix.
    pub fn padded(&self, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |r, c| if r < self.rows && c < self.cols { self[(r, c)] } else { ZERO })
    }

    pub fn submatrix(&self, row0: usize, col0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |r, c| self[(row0 + r, col0 + c)])
    }

    /// Writes `block` with its top-left corner at `(row0, col0)`.
    pub fn set_block(&mut self, row0: usize, col0: usize, block: &Self) {
        for r in 0..block.rows {
            for c in 0..block.cols {
                self[(row0 + r, col0 + c)] = block[(r, c)];
            }
        }
    }

    /// `||M†M - I||_max`, i.e. how far the columns are from orthonormal.
    pub fn orthonormality_error(&self) -> f64 {
        let g = self.adjoint().matmul(self);
        g.max_abs_diff(&Self::identity(self.cols))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.max_abs_diff(&self.adjoint()) <= tol
    }

    /// Moore-Penrose pseudoinverse from the SVD with the absolute rank threshold.
    pub fn pseudoinverse(&self) -> Result<Self> {
        let s = svd(self)?;
        let inv: Vec<Complex64> = s
            .singular_values
            .iter()
            .map(|&x| if x > RANK_THRESHOLD { Complex64::new(1.0 / x, 0.0) } else { ZERO })
            .collect();
        Ok(s.right_vectors.matmul(&Self::diagonal(&inv)).matmul(&s.left_vectors.adjoint()))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:>9.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Smallest power of two that is `>= n` (and at least 2), with its exponent.
pub fn next_power_of_two(n: usize) -> (usize, usize) {
    let p = n.max(2).next_power_of_two();
    (p, p.trailing_zeros() as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constructors_reject_bad_shapes() {
        assert!(ComplexMatrix::new(2, 2, vec![ZERO; 3]).is_err());
        assert!(ComplexMatrix::new(0, 2, vec![]).is_err());
        assert!(ComplexMatrix::new(1, 1, vec![c(f64::NAN, 0.0)]).is_err());
        assert!(ComplexVector::new(vec![]).is_err());
        assert!(ComplexVector::new(vec![c(0.0, f64::INFINITY)]).is_err());
    }

    #[test]
    fn kron_matches_block_layout() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let i = ComplexMatrix::identity(2);
        let k = a.kron(&i);
        assert_eq!(k[(0, 2)], c(2.0, 0.0));
        assert_eq!(k[(3, 1)], c(3.0, 0.0));
        assert_eq!(k[(1, 2)], ZERO);
    }

    #[test]
    fn matmul_and_adjoint() {
        let a = ComplexMatrix::new(2, 2, vec![c(1.0, 1.0), c(0.0, 2.0), c(3.0, 0.0), c(1.0, -1.0)]).unwrap();
        let g = a.adjoint().matmul(&a);
        assert!(g.is_hermitian(1e-14));
        let v = ComplexVector::new(vec![ONE, c(0.0, 1.0)]).unwrap();
        let av = a.mul_vec(&v).unwrap();
        assert!((av[0] - c(-1.0, 1.0)).norm() < 1e-15);
        assert!((av[1] - c(4.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn next_power_of_two_floors_at_two() {
        assert_eq!(next_power_of_two(1), (2, 1));
        assert_eq!(next_power_of_two(8), (8, 3));
        assert_eq!(next_power_of_two(30), (32, 5));
    }
}
