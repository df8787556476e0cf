use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{inverse_spd, SymMatrix};
use crate::scalar::{sign, Scalar};

/// Optimality certificate of a candidate `theta_hat`, with the subgradient
/// rebuilt as `Z = (theta_hat^{-1} - S) / lambda` off the diagonal.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KktReport<T> {
    /// Max over nonzero `theta_ij` of `|Z_ij - sign(theta_ij)|`.
    pub max_stationarity_violation: T,
    /// Max over zero off-diagonal `theta_ij` of `(|Z_ij| - 1)_+`.
    pub max_subgradient_excess: T,
    /// Nonzero entries with `|Z_ij - sign(theta_ij)| > tol`, unordered pairs.
    pub sign_violations: usize,
    /// `max_i |S_ii - (theta^{-1})_ii|`.
    pub diagonal_residual: T,
}

impl<T: Scalar> KktReport<T> {
    pub fn worst(&self) -> T {
        self.max_stationarity_violation.max(self.max_subgradient_excess).max(self.diagonal_residual)
    }
}

/// Note the stationarity and excess entries are measured on the `Z` scale;
/// multiply by `lambda` to compare with the residual the solver reports.
pub fn check_kkt<T: Scalar>(
    sigma_hat: &SymMatrix<T>,
    theta_hat: &SymMatrix<T>,
    lambda: T,
    tol: T,
) -> Result<KktReport<T>> {
    if !(lambda > T::zero()) {
        return Err(Error::InvalidParameter(format!("check_kkt needs lambda > 0, got {lambda}")));
    }
    sigma_hat.check_same_dim(theta_hat)?;
    let w = inverse_spd(theta_hat)?;
    let p = sigma_hat.dim();
    let mut report = KktReport {
        max_stationarity_violation: T::zero(),
        max_subgradient_excess: T::zero(),
        sign_violations: 0,
        diagonal_residual: T::zero(),
    };
    for i in 0..p {
        report.diagonal_residual = report.diagonal_residual.max((sigma_hat.get(i, i) - w.get(i, i)).abs());
        for j in i + 1..p {
            let z = (w.get(i, j) - sigma_hat.get(i, j)) / lambda;
            let t = theta_hat.get(i, j);
            if t != T::zero() {
                let gap = (z - sign(t)).abs();
                report.max_stationarity_violation = report.max_stationarity_violation.max(gap);
                if gap > tol {
                    report.sign_violations += 1;
                }
            } else {
                report.max_subgradient_excess = report.max_subgradient_excess.max(z.abs() - T::one());
            }
        }
    }
    Ok(report)
}
