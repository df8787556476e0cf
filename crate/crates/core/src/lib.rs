//! Sparse precision-matrix estimation by the `l1`-penalized log-determinant
//! program, with the diagnostics that govern when it recovers the graph.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to `f64`, which is what the
//! experiment harness and the CLI use.
//!
//! Modules:
//! - [`linalg`]: symmetric matrices, Cholesky, log-det, inverse, norms.
//! - [`models`]: chain, grid, star, diamond and custom Gaussian graphical models.
//! - [`sampling`]: Gaussian draws, sample covariance, tail checks.
//! - [`solver`]: block coordinate descent for the penalized program, KKT checks.
//! - [`theory`]: Hessian blocks, incoherence, tail inverses, sample-size
//!   thresholds, remainder, primal-dual witness.
//! - [`harness`]: deterministic parallel Monte Carlo sweeps with CSV/JSON output.

// `!(x > 0)` guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod linalg;
pub mod models;
pub mod sampling;
pub mod scalar;
pub mod solver;
pub mod theory;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type SymMatrix64 = linalg::SymMatrix<f64>;
pub type SymMatrix32 = linalg::SymMatrix<f32>;
pub type ModelSpec64 = models::ModelSpec<f64>;
pub type ModelSpec32 = models::ModelSpec<f32>;
pub type SolverConfig64 = solver::SolverConfig<f64>;
pub type SolveResult64 = solver::SolveResult<f64>;
pub type Dataset64 = sampling::Dataset<f64>;
pub type Diagnostics64 = theory::Diagnostics<f64>;
pub type TailModel64 = theory::TailModel<f64>;
pub type WitnessReport64 = theory::WitnessReport<f64>;
