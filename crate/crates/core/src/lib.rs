//! Tensor-field calculus on structured grids: pointwise matrix
//! decompositions, row-wise differential operators with mixed boundary
//! conditions, conformal Killing fields, spectral estimation of Korn-type
//! inequality constants, the classical half-disk counterexample family and a
//! pseudostress least-squares Stokes solver.

pub mod algebra;
pub mod counterexample;
pub mod error;
pub mod field;
pub mod grid;
pub mod helmholtz;
pub mod kernel;
pub mod linalg;
pub mod spectra;
pub mod ops;

pub use error::{Error, Result};
