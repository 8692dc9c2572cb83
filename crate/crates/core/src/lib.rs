//! Quantum linear-systems pathway on a classical state-vector simulator.
//!
//! The crate is `no_std` (it needs `alloc`) and covers the whole pipeline from a
//! sparse matrix to a rescaled solution vector:
//!
//! - [`numerics`]: dense complex linear algebra (one-sided Jacobi SVD,
//!   pseudoinverse) and a Levenberg-Marquardt double-exponential fit.
//! - [`statevector`]: a small-register simulator with the QSP / flag / matrix
//!   register layout, multi-controlled gates, post-selection and sampling.
//! - [`blockenc`]: block encodings of banded matrices built from data items,
//!   cyclic shifts, deletions and inserts, plus a dense dilation encoder.
//! - [`invpoly`]: the Chebyshev expansion of the regularized inverse, symmetric
//!   QSP phase finding and the W_X to reflection phase conversion.
//! - [`qsvt`]: QSVT circuit assembly and the end-to-end linear solver.
//! - [`pde`]: heat-equation FDM systems, Carleman linearization, the Burgers'
//!   instantiation and the random complex tridiagonal generator.
#![no_std]
// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod blockenc;
mod error;
pub mod invpoly;
pub mod numerics;
pub mod pde;
pub mod qsvt;
pub mod statevector;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use numerics::{ComplexMatrix, ComplexVector};
