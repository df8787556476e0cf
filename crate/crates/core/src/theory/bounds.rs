use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::theory::{Diagnostics, TailModel};

fn p_tau<T: Scalar>(p: usize, tau: T) -> Result<T> {
    if !(tau > T::lit(2.0)) {
        return Err(Error::InvalidParameter(format!("tau must exceed 2, got {tau}")));
    }
    if p < 2 {
        return Err(Error::InvalidParameter(format!("p must be at least 2, got {p}")));
    }
    Ok(T::from_usize_lossy(p).powf(tau))
}

/// `delta_bar(n, p^tau)`.
pub fn delta_bar<T: Scalar>(tail: &TailModel<T>, n: usize, p: usize, tau: T) -> Result<T> {
    tail.delta_inverse(n, p_tau(p, tau)?)
}

/// `(8 / alpha) * delta_bar(n, p^tau)`.
pub fn lambda_theory<T: Scalar>(alpha: T, tail: &TailModel<T>, n: usize, p: usize, tau: T) -> Result<T> {
    if !(alpha > T::zero() && alpha <= T::one()) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    Ok(T::lit(8.0) / alpha * delta_bar(tail, n, p, tau)?)
}

/// `c * sqrt(log p / n)`.
pub fn lambda_practical<T: Scalar>(c: T, n: usize, p: usize) -> T {
    c * (T::from_usize_lossy(p).ln() / T::from_usize_lossy(n)).sqrt()
}

fn threshold_with<T: Scalar>(diag: &Diagnostics<T>, tail: &TailModel<T>, p: usize, tau: T, extra: T) -> Result<T> {
    let infl = diag.inflation()?;
    let d = T::from_usize_lossy(diag.degree_d);
    let (ks, kg) = (diag.k_sigma, diag.k_gamma);
    let core = T::lit(6.0) * infl * d * (ks * kg).max(ks.powi(3) * kg * kg);
    let denom = tail.v_star().max(core).max(extra);
    tail.n_inverse(T::one() / denom, p_tau(p, tau)?)
}

/// Sample size above which the elementwise bound is guaranteed.
pub fn threshold_ellinf<T: Scalar>(diag: &Diagnostics<T>, tail: &TailModel<T>, p: usize, tau: T) -> Result<T> {
    threshold_with(diag, tail, p, tau, T::zero())
}

/// Sample size above which signed-support recovery is guaranteed. Equals
/// [`threshold_ellinf`] for graphs without edges.
pub fn threshold_model_selection<T: Scalar>(diag: &Diagnostics<T>, tail: &TailModel<T>, p: usize, tau: T) -> Result<T> {
    let extra = match diag.theta_min {
        Some(tm) => T::lit(2.0) * diag.k_gamma * diag.inflation()? / tm,
        None => T::zero(),
    };
    threshold_with(diag, tail, p, tau, extra)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PredictedBounds<T> {
    pub delta_bar: T,
    pub ellinf: T,
    pub frobenius: T,
    pub spectral: T,
    pub cov_ellinf: T,
    pub cov_spectral: T,
}

pub fn predicted_bounds<T: Scalar>(
    diag: &Diagnostics<T>,
    tail: &TailModel<T>,
    n: usize,
    p: usize,
    tau: T,
) -> Result<PredictedBounds<T>> {
    let infl = diag.inflation()?;
    let db = delta_bar(tail, n, p, tau)?;
    let (ks, kg) = (diag.k_sigma, diag.k_gamma);
    let d = T::from_usize_lossy(diag.degree_d);
    let root = T::from_usize_lossy(diag.sparsity_s + p).sqrt();
    let ellinf = T::lit(2.0) * infl * kg * db;
    let c3 = T::lit(2.0) * ks * ks * kg * infl;
    let c4 = T::lit(6.0) * ks.powi(3) * kg * kg * infl * infl;
    Ok(PredictedBounds {
        delta_bar: db,
        ellinf,
        frobenius: ellinf * root,
        spectral: ellinf * root.min(d),
        cov_ellinf: c3 * db + c4 * d * db * db,
        cov_spectral: c3 * d * db + c4 * d * d * db * db,
    })
}
