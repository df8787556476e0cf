use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Tail function `f(n, delta)` bounding `1 / P[|S_ij - Sigma*_ij| > delta]`.
///
/// `SubGaussian` has `f = exp(c* n delta^2) / 4`, valid for
/// `delta < 1 / v*`; `Polynomial` has `f = c* n^m delta^{2m}`, valid for
/// every `delta > 0` (`v* = 0`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TailModel<T> {
    SubGaussian { sigma: T, max_var: T },
    Polynomial { m: u32, k_m: T, max_var: T },
}

impl<T: Scalar> TailModel<T> {
    /// Gaussian vectors: rescaled coordinates are sub-Gaussian with `sigma = 1`.
    pub fn gaussian(max_var: T) -> Self {
        TailModel::SubGaussian { sigma: T::one(), max_var }
    }

    pub fn subgaussian(sigma: T, max_var: T) -> Result<Self> {
        if !(sigma > T::zero() && max_var > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "sub-Gaussian tail needs sigma, max_var > 0 (got {sigma}, {max_var})"
            )));
        }
        Ok(TailModel::SubGaussian { sigma, max_var })
    }

    pub fn polynomial(m: u32, k_m: T, max_var: T) -> Result<Self> {
        if m == 0 || !(k_m > T::zero() && max_var > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "polynomial tail needs m >= 1, K_m > 0, max_var > 0 (got {m}, {k_m}, {max_var})"
            )));
        }
        Ok(TailModel::Polynomial { m, k_m, max_var })
    }

    pub fn max_var(&self) -> T {
        match *self {
            TailModel::SubGaussian { max_var, .. } | TailModel::Polynomial { max_var, .. } => max_var,
        }
    }

    pub fn c_star(&self) -> T {
        match *self {
            TailModel::SubGaussian { sigma, max_var } => {
                let a = T::one() + T::lit(4.0) * sigma * sigma;
                T::one() / (T::lit(128.0) * a * a * max_var * max_var)
            }
            TailModel::Polynomial { m, k_m, max_var } => {
                let mf = T::from_u32(m).unwrap();
                let two_m = T::lit(2.0) * mf;
                let denom =
                    mf.powf(two_m + T::one()) * T::lit(2.0).powf(two_m) * max_var.powf(two_m) * (k_m + T::one());
                T::one() / denom
            }
        }
    }

    /// `v*`; zero when the bound holds for every `delta`.
    pub fn v_star(&self) -> T {
        match *self {
            TailModel::SubGaussian { sigma, max_var } => {
                T::one() / (max_var * T::lit(8.0) * (T::one() + T::lit(4.0) * sigma * sigma))
            }
            TailModel::Polynomial { .. } => T::zero(),
        }
    }

    /// `1 / v*`, the largest `delta` the tail bound covers (infinite for `v* = 0`).
    pub fn delta_ceiling(&self) -> T {
        let v = self.v_star();
        if v == T::zero() {
            T::infinity()
        } else {
            T::one() / v
        }
    }

    /// `f(n, delta)`.
    pub fn tail_function(&self, n: usize, delta: T) -> T {
        let nf = T::from_usize_lossy(n);
        match *self {
            TailModel::SubGaussian { .. } => (self.c_star() * nf * delta * delta).exp() / T::lit(4.0),
            TailModel::Polynomial { m, .. } => {
                let mf = T::from_u32(m).unwrap();
                self.c_star() * nf.powf(mf) * delta.powf(T::lit(2.0) * mf)
            }
        }
    }

    /// `1 / f(n, delta)`, the bound on a single entry's exceedance probability.
    pub fn tail_probability(&self, n: usize, delta: T) -> T {
        T::one() / self.tail_function(n, delta)
    }

    /// `delta_bar(n, r)`: the `delta` at which `f(n, delta) = r`.
    pub fn delta_inverse(&self, n: usize, r: T) -> Result<T> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        let nf = T::from_usize_lossy(n);
        match *self {
            TailModel::SubGaussian { .. } => {
                check_r_subgaussian(r)?;
                Ok(((T::lit(4.0) * r).ln() / (self.c_star() * nf)).sqrt())
            }
            TailModel::Polynomial { m, .. } => {
                check_r_positive(r)?;
                let mf = T::from_u32(m).unwrap();
                Ok((r / self.c_star()).powf(T::one() / (T::lit(2.0) * mf)) / nf.sqrt())
            }
        }
    }

    /// `n_bar(delta, r)`: the `n` at which `f(n, delta) = r`.
    pub fn n_inverse(&self, delta: T, r: T) -> Result<T> {
        if !(delta > T::zero()) {
            return Err(Error::InvalidParameter(format!("delta must be > 0, got {delta}")));
        }
        match *self {
            TailModel::SubGaussian { .. } => {
                check_r_subgaussian(r)?;
                Ok((T::lit(4.0) * r).ln() / (self.c_star() * delta * delta))
            }
            TailModel::Polynomial { m, .. } => {
                check_r_positive(r)?;
                let mf = T::from_u32(m).unwrap();
                Ok((r / self.c_star()).powf(T::one() / mf) / (delta * delta))
            }
        }
    }
}

fn check_r_subgaussian<T: Scalar>(r: T) -> Result<()> {
    if r > T::lit(0.25) && r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("sub-Gaussian inverse needs r > 1/4, got {r}")))
    }
}

fn check_r_positive<T: Scalar>(r: T) -> Result<()> {
    if r > T::zero() && r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("polynomial inverse needs r > 0, got {r}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_constants() {
        let t = TailModel::gaussian(1.0f64);
        assert!((t.c_star() - 1.0 / 3200.0).abs() < 1e-18);
        assert!((t.delta_ceiling() - 40.0).abs() < 1e-12);
        let n = 500;
        let r = 64f64.powi(3);
        let expected = ((3.0 * 64f64.ln() + 4f64.ln()) * 128.0 * 25.0 / n as f64).sqrt();
        assert!((t.delta_inverse(n, r).unwrap() - expected).abs() < 1e-12);
        let ratio = t.delta_inverse(100, r).unwrap() / t.delta_inverse(200, r).unwrap();
        assert!((ratio - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn polynomial_constants() {
        let t = TailModel::polynomial(2, 3.0, 1.5).unwrap();
        let c = 1.0 / (2f64.powi(5) * 2f64.powi(4) * 1.5f64.powi(4) * 4.0);
        assert!((t.c_star() - c).abs() < 1e-15);
        assert_eq!(t.v_star(), 0.0);
        assert!(t.delta_ceiling().is_infinite());
        let d = t.delta_inverse(400, 10.0).unwrap();
        assert!((d - (10.0 / c).powf(0.25) / 20.0).abs() < 1e-12);
        assert!((t.n_inverse(0.3, 10.0).unwrap() - (10.0 / c).sqrt() / 0.09).abs() < 1e-9);
    }

    #[test]
    fn inverses_undo_tail_function() {
        for t in [TailModel::gaussian(1.3f64), TailModel::polynomial(3, 2.0, 0.7).unwrap()] {
            let n = 250;
            let d = t.delta_inverse(n, 1000.0).unwrap();
            assert!((t.tail_function(n, d) / 1000.0 - 1.0).abs() < 1e-10);
            let nn = t.n_inverse(0.2, 1000.0).unwrap();
            assert!((t.delta_inverse(nn.ceil() as usize, 1000.0).unwrap()) <= 0.2 * (1.0 + 1e-9));
        }
    }

    #[test]
    fn domain_errors() {
        let t = TailModel::gaussian(1.0f64);
        assert!(t.delta_inverse(10, 0.25).is_err());
        assert!(t.n_inverse(0.0, 2.0).is_err());
        assert!(t.delta_inverse(0, 2.0).is_err());
        assert!(TailModel::polynomial(0, 1.0, 1.0).is_err());
        assert!(TailModel::subgaussian(0.0, 1.0).is_err());
    }
}
