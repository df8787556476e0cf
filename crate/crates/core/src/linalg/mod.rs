//! Dense symmetric matrices and the kernels built on them.

mod cholesky;
pub mod io;
mod matrix;
mod norms;

pub use cholesky::{cholesky, inverse_spd, is_positive_definite, log_det, Cholesky};
pub use matrix::{DenseMatrix, SymMatrix};
pub use norms::{norm_elem_max, norm_frobenius, norm_linf_op, norm_spectral, symmetric_eigenvalues, JACOBI_MAX_DIM};
