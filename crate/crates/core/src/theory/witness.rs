use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{inverse_spd, norm_elem_max, DenseMatrix, SymMatrix};
use crate::models::{signed_edge_set, ModelSpec};
use crate::sampling::noise_matrix;
use crate::scalar::Scalar;
use crate::solver::{solve, solve_restricted, SolveResult, SolverConfig, Support};
use crate::theory::{delta_bar, diagnostics, Diagnostics, TailModel};

/// `R(Delta) = (Theta* + Delta)^{-1} - Theta*^{-1} + Theta*^{-1} Delta Theta*^{-1}`.
pub fn remainder<T: Scalar>(theta_star: &SymMatrix<T>, delta: &SymMatrix<T>) -> Result<SymMatrix<T>> {
    let sigma = inverse_spd(theta_star)?;
    let perturbed = inverse_spd(&theta_star.add(delta)?)?;
    let sds = SymMatrix::from_dense_symmetrized(&sigma.matmul(delta)?.matmul(&DenseMatrix::from_sym(&sigma)))?;
    perturbed.sub(&sigma)?.add(&sds)
}

/// Remainder control: the bound `1.5 d ||Delta||^2 K_Sigma^3`, and whether
/// `||Delta||_inf <= 1 / (3 K_Sigma d)` places `Delta` in its range.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RemainderCheck<T> {
    pub r_inf: T,
    pub bound: T,
    pub in_range: bool,
}

pub fn remainder_check<T: Scalar>(model: &ModelSpec<T>, k_sigma: T, delta: &SymMatrix<T>) -> Result<RemainderCheck<T>> {
    let r = remainder(&model.theta_star, delta)?;
    let d = T::from_usize_lossy(model.degree_d);
    let dinf = norm_elem_max(delta);
    Ok(RemainderCheck {
        r_inf: norm_elem_max(&r),
        bound: T::lit(1.5) * d * dinf * dinf * k_sigma.powi(3),
        in_range: dinf <= T::one() / (T::lit(3.0) * k_sigma * d),
    })
}

/// Outcome of the primal-dual witness construction for one `Sigma_hat`.
#[derive(Clone, Debug, Serialize)]
pub struct WitnessReport<T> {
    pub lambda: T,
    /// `max |Z_ij|` over the complement of the augmented support.
    pub max_abs_z_sc: T,
    pub strict_dual_feasible: bool,
    #[serde(skip)]
    pub restricted_result: SolveResult<T>,
    pub restricted_converged: bool,
    pub restricted_kkt_residual: T,
    /// `||Theta_tilde - Theta*||_inf`.
    pub ell_inf_error: T,
    pub sign_consistent: bool,
    /// `||Sigma_hat - Sigma*||_inf`.
    pub w_inf: T,
    pub lemma4_lhs: T,
    pub lemma4_rhs: T,
    pub lemma4_ok: bool,
    pub lemma6_radius: T,
    pub lemma6_precondition_ok: bool,
    pub lemma7_ok: bool,
    /// `||Theta_tilde - Theta_hat||_inf` against the unrestricted solve,
    /// computed only when strictly dual feasible.
    pub full_solve_gap: Option<T>,
    /// `full_solve_gap <= 10 * tol`.
    pub matches_full_solve: Option<bool>,
    #[serde(skip)]
    pub full_result: Option<SolveResult<T>>,
}

pub fn witness_construct<T: Scalar>(
    model: &ModelSpec<T>,
    sigma_hat: &SymMatrix<T>,
    lambda: T,
    config: &SolverConfig<T>,
) -> Result<WitnessReport<T>> {
    let diag = diagnostics(model)?;
    witness_construct_with(model, &diag, sigma_hat, lambda, config)
}

/// As [`witness_construct`] with precomputed diagnostics.
pub fn witness_construct_with<T: Scalar>(
    model: &ModelSpec<T>,
    diag: &Diagnostics<T>,
    sigma_hat: &SymMatrix<T>,
    lambda: T,
    config: &SolverConfig<T>,
) -> Result<WitnessReport<T>> {
    if !(lambda > T::zero()) {
        return Err(Error::InvalidParameter(format!("witness needs lambda > 0, got {lambda}")));
    }
    sigma_hat.check_same_dim(&model.sigma_star)?;
    let p = model.p();
    let support = Support::from_edges(p, &model.edges);
    let mut cfg = config.clone();
    cfg.lambda = lambda;
    let restricted = solve_restricted(sigma_hat, &support, &cfg)?;

    let mut max_abs_z_sc = T::zero();
    for (i, j) in support.complement_pairs() {
        let z = (restricted.w_hat.get(i, j) - sigma_hat.get(i, j)) / lambda;
        max_abs_z_sc = max_abs_z_sc.max(z.abs());
    }
    let strict = max_abs_z_sc < T::one();

    let delta = restricted.theta_hat.sub(&model.theta_star)?;
    let ell_inf_error = norm_elem_max(&delta);
    let sign_consistent = signed_edge_set(&restricted.theta_hat, model.zero_threshold) == model.signed_edges();
    let w_inf = norm_elem_max(&noise_matrix(sigma_hat, model)?);
    let r_inf = norm_elem_max(&remainder(&model.theta_star, &delta)?);

    let (ks, kg) = (diag.k_sigma, diag.k_gamma);
    let d = T::from_usize_lossy(model.degree_d);
    let three = T::lit(3.0);
    let lemma4_lhs = w_inf.max(r_inf);
    let lemma4_rhs = diag.alpha * lambda / T::lit(8.0);
    let lemma6_radius = T::lit(2.0) * kg * (w_inf + lambda);
    let lemma6_cap = (T::one() / (three * ks * d)).min(T::one() / (three * ks.powi(3) * kg * d));
    let lemma7_ok = match model.theta_min {
        Some(tm) => tm >= T::lit(4.0) * kg * (w_inf + lambda),
        None => true,
    };

    let (full_solve_gap, matches_full_solve, full_result) = if strict {
        let full = solve(sigma_hat, &cfg)?;
        let gap = full.theta_hat.max_abs_diff(&restricted.theta_hat)?;
        (Some(gap), Some(gap <= T::lit(10.0) * cfg.tol), Some(full))
    } else {
        (None, None, None)
    };

    Ok(WitnessReport {
        lambda,
        max_abs_z_sc,
        strict_dual_feasible: strict,
        restricted_converged: restricted.converged,
        restricted_kkt_residual: restricted.kkt_residual,
        restricted_result: restricted,
        ell_inf_error,
        sign_consistent,
        w_inf,
        lemma4_lhs,
        lemma4_rhs,
        lemma4_ok: lemma4_lhs <= lemma4_rhs,
        lemma6_radius,
        lemma6_precondition_ok: lemma6_radius <= lemma6_cap,
        lemma7_ok,
        full_solve_gap,
        matches_full_solve,
        full_result,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoiseEvent<T> {
    pub w_inf: T,
    pub delta_bar: T,
    pub event_holds: bool,
}

/// Whether `||Sigma_hat - Sigma*||_inf <= delta_bar(n, p^tau)`.
pub fn noise_event_check<T: Scalar>(
    model: &ModelSpec<T>,
    sigma_hat: &SymMatrix<T>,
    tail: &TailModel<T>,
    n: usize,
    p: usize,
    tau: T,
) -> Result<NoiseEvent<T>> {
    let w_inf = norm_elem_max(&noise_matrix(sigma_hat, model)?);
    let db = delta_bar(tail, n, p, tau)?;
    Ok(NoiseEvent { w_inf, delta_bar: db, event_holds: w_inf <= db })
}
