use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{cholesky, norm_linf_op, DenseMatrix, SymMatrix};
use crate::models::ModelSpec;
use crate::scalar::Scalar;
use crate::solver::Support;

/// The `(S, S)` and `(S^c, S)` blocks of `Gamma* = Sigma* (x) Sigma*`.
/// Rows and columns are indexed by ordered pairs in row-major order.
#[derive(Clone, Debug)]
pub struct GammaBlocks<T> {
    pub s_pairs: Vec<(usize, usize)>,
    pub sc_pairs: Vec<(usize, usize)>,
    pub gamma_ss: SymMatrix<T>,
    pub gamma_scs: DenseMatrix<T>,
}

/// `Gamma_{(j,k),(l,m)} = Sigma_jl * Sigma_km`, evaluated only on the two
/// blocks the theory needs.
pub fn gamma_blocks<T: Scalar>(sigma_star: &SymMatrix<T>, support: &Support) -> Result<GammaBlocks<T>> {
    if sigma_star.dim() != support.dim() {
        return Err(Error::DimensionMismatch { expected: sigma_star.dim(), found: support.dim() });
    }
    let s_pairs = support.pairs();
    let sc_pairs = support.complement_pairs();
    let entry = |(j, k): (usize, usize), (l, m): (usize, usize)| sigma_star.get(j, l) * sigma_star.get(k, m);
    let ns = s_pairs.len();
    let mut ss = Vec::with_capacity(ns * ns);
    for &a in &s_pairs {
        for &b in &s_pairs {
            ss.push(entry(a, b));
        }
    }
    // Symmetric entry by entry because Sigma* is exactly symmetric.
    let gamma_ss = SymMatrix::new(ns, ss)?;
    let gamma_scs = DenseMatrix::from_fn(sc_pairs.len(), ns, |r, c| entry(sc_pairs[r], s_pairs[c]));
    Ok(GammaBlocks { s_pairs, sc_pairs, gamma_ss, gamma_scs })
}

/// Conditioning and incoherence constants of a model.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostics<T> {
    /// `|||Sigma*|||_inf`.
    pub k_sigma: T,
    /// `|||(Gamma*_SS)^{-1}|||_inf`.
    pub k_gamma: T,
    /// `1 - |||Gamma*_{S^c S} (Gamma*_SS)^{-1}|||_inf`; may be `<= 0`.
    pub alpha: T,
    pub incoherent: bool,
    pub theta_min: Option<T>,
    pub degree_d: usize,
    pub sparsity_s: usize,
    pub max_var: T,
    /// Model complexity `K`; needs `alpha > 0`. The `theta_min` term is
    /// dropped for graphs without edges.
    pub complexity_k: Option<T>,
}

impl<T: Scalar> Diagnostics<T> {
    /// `alpha` when positive, otherwise [`Error::IncoherenceFails`].
    pub fn require_alpha(&self) -> Result<T> {
        if self.incoherent {
            Ok(self.alpha)
        } else {
            Err(Error::IncoherenceFails { alpha: self.alpha.as_f64() })
        }
    }

    /// `1 + 8 / alpha`.
    pub fn inflation(&self) -> Result<T> {
        Ok(T::one() + T::lit(8.0) / self.require_alpha()?)
    }
}

pub fn diagnostics<T: Scalar>(model: &ModelSpec<T>) -> Result<Diagnostics<T>> {
    let support = Support::from_edges(model.p(), &model.edges);
    let blocks = gamma_blocks(&model.sigma_star, &support)?;
    let chol = cholesky(&blocks.gamma_ss).map_err(|_| Error::SingularGammaSS)?;
    let inv = chol.inverse();
    let k_gamma = norm_linf_op(&inv);
    let ns = blocks.s_pairs.len();
    let mut worst = T::zero();
    for r in 0..blocks.sc_pairs.len() {
        let row = blocks.gamma_scs.row(r);
        let mut sum = T::zero();
        for c in 0..ns {
            let inv_col = inv.row(c);
            let mut v = T::zero();
            for (x, y) in row.iter().zip(inv_col) {
                v += *x * *y;
            }
            sum += v.abs();
        }
        worst = worst.max(sum);
    }
    let alpha = T::one() - worst;
    let k_sigma = norm_linf_op(&model.sigma_star);
    let max_var = model.max_variance();
    let incoherent = alpha > T::zero();
    let d = T::from_usize_lossy(model.degree_d);
    let complexity_k = incoherent.then(|| {
        let mut m = (k_sigma * k_gamma).max(k_sigma.powi(3) * k_gamma * k_gamma);
        if let Some(tm) = model.theta_min {
            m = m.max(k_gamma / (d * tm));
        }
        (T::one() + T::lit(8.0) / alpha) * max_var * m
    });
    Ok(Diagnostics {
        k_sigma,
        k_gamma,
        alpha,
        incoherent,
        theta_min: model.theta_min,
        degree_d: model.degree_d,
        sparsity_s: model.sparsity_s,
        max_var,
        complexity_k,
    })
}
