//! Block coordinate descent for
//!
//! ```text
//! minimize  trace(Theta * S) - log det Theta + lambda * sum_{i != j} |Theta_ij|
//! ```
//!
//! over positive definite `Theta`, optionally with `Theta` constrained to
//! vanish outside a [`Support`].
//!
//! Each outer sweep visits every column `j`. With the rest of `Theta` held
//! fixed, the optimal column solves a lasso whose quadratic form is
//! `s_jj * (Theta_{-j,-j})^{-1}`; that inverse is read off the maintained
//! `W = Theta^{-1}` by a rank-one downdate, and `W` is updated in closed form
//! afterwards. Every block step is an exact minimization, so the objective
//! never increases and `Theta` stays positive definite. After each sweep `W`
//! is recomputed from a fresh Cholesky factorization of `Theta`.
//!
//! Block steps converge linearly, slowly when `S` is badly conditioned. Once
//! the sign pattern of `Theta` survives a sweep unchanged, a damped Newton
//! refinement on that pattern is tried; the KKT check afterwards decides
//! whether the pattern was the right one, and sweeps resume if not.

mod kkt;
mod lasso;
mod newton;
mod support;

pub use kkt::{check_kkt, KktReport};
pub use support::Support;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky, inverse_spd, Cholesky, SymMatrix};
use crate::scalar::{sign, Scalar};

/// Starting point of the outer iteration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Init {
    /// `Theta = diag(1 / S_ii)`.
    #[default]
    Diagonal,
    Identity,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig<T> {
    /// Off-diagonal penalty, `>= 0`.
    pub lambda: T,
    /// Convergence threshold on the KKT residual.
    pub tol: T,
    pub max_outer_sweeps: usize,
    /// Stopping threshold of the per-column lasso.
    pub inner_tol: T,
    pub max_inner_passes: usize,
    pub init: Init,
}

impl<T: Scalar> SolverConfig<T> {
    pub fn new(lambda: T) -> Self {
        Self {
            lambda,
            tol: T::lit(1e-7),
            max_outer_sweeps: 500,
            inner_tol: T::lit(1e-9),
            max_inner_passes: 10_000,
            init: Init::Diagonal,
        }
    }

    pub fn with_tol(mut self, tol: T) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_init(mut self, init: Init) -> Self {
        self.init = init;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= T::zero()) || !self.lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("lambda must be finite and >= 0, got {}", self.lambda)));
        }
        if !(self.tol > T::zero()) {
            return Err(Error::InvalidParameter(format!("tol must be > 0, got {}", self.tol)));
        }
        if !(self.inner_tol > T::zero()) {
            return Err(Error::InvalidParameter(format!("inner_tol must be > 0, got {}", self.inner_tol)));
        }
        if self.max_outer_sweeps == 0 || self.max_inner_passes == 0 {
            return Err(Error::InvalidParameter("iteration caps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SolveResult<T> {
    pub theta_hat: SymMatrix<T>,
    /// `theta_hat^{-1}`.
    pub w_hat: SymMatrix<T>,
    /// Subgradient of the off-diagonal `l1` norm at `theta_hat`; zero
    /// diagonal, and zero outside the support of a restricted solve.
    pub z_hat: SymMatrix<T>,
    pub sweeps: usize,
    /// Max-norm of `S - W + lambda Z` over the (support) coordinates.
    pub kkt_residual: T,
    pub converged: bool,
    pub objective: T,
    /// Objective after initialization and after every sweep.
    pub objective_trace: Vec<T>,
    /// Largest `(|w_jk - s_jk| - lambda)_+` produced by any column update,
    /// over the coordinates that column was free to move.
    pub max_dual_excess: T,
    pub lambda: T,
}

impl<T: Scalar> SolveResult<T> {
    pub fn ensure_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged { what: "log-determinant solver", iterations: self.sweeps })
        }
    }
}

/// Solves the penalized program over all positive definite matrices.
pub fn solve<T: Scalar>(sigma_hat: &SymMatrix<T>, config: &SolverConfig<T>) -> Result<SolveResult<T>> {
    run(sigma_hat, &Support::full(sigma_hat.dim()), config)
}

/// Solves the program with `Theta_jk = 0` forced for `(j, k)` outside `support`.
pub fn solve_restricted<T: Scalar>(
    sigma_hat: &SymMatrix<T>,
    support: &Support,
    config: &SolverConfig<T>,
) -> Result<SolveResult<T>> {
    run(sigma_hat, support, config)
}

/// `trace(Theta S) - log det Theta + lambda * ||Theta||_{1,off}`.
pub fn objective<T: Scalar>(sigma_hat: &SymMatrix<T>, theta: &SymMatrix<T>, lambda: T) -> Result<T> {
    let chol = cholesky(theta)?;
    objective_with(sigma_hat, theta, &chol, lambda)
}

fn objective_with<T: Scalar>(s: &SymMatrix<T>, theta: &SymMatrix<T>, chol: &Cholesky<T>, lambda: T) -> Result<T> {
    Ok(theta.trace_product(s)? - chol.log_det() + lambda * theta.offdiag_l1())
}

/// Sweeps a sign pattern must survive before Newton refinement is tried.
const REFINE_AFTER: usize = 3;
/// Sweeps before the same pattern may be refined again.
const REFINE_RETRY: usize = 10;

fn run<T: Scalar>(s: &SymMatrix<T>, support: &Support, cfg: &SolverConfig<T>) -> Result<SolveResult<T>> {
    cfg.validate()?;
    let p = s.dim();
    if support.dim() != p {
        return Err(Error::DimensionMismatch { expected: p, found: support.dim() });
    }
    for i in 0..p {
        let v = s.get(i, i);
        if !(v > T::zero()) {
            return Err(Error::NonPositiveDiagonal { index: i, value: v.as_f64() });
        }
    }
    if cfg.lambda == T::zero() {
        // Without a penalty the optimum exists only for positive definite S.
        cholesky(s)?;
        if support.is_full() {
            let theta = inverse_spd(s)?;
            let w = inverse_spd(&theta)?;
            let obj = objective(s, &theta, T::zero())?;
            return Ok(finish(s, support, cfg, theta, w, 0, obj, vec![obj], T::zero()));
        }
    }

    let mut state = State::init(s, cfg.init);
    let mut theta = state.theta_matrix();
    let mut w = inverse_spd(&theta)?;
    state.w = w.as_slice().to_vec();
    let mut obj = objective(s, &theta, cfg.lambda)?;
    let mut trace = vec![obj];
    let (mut kkt, _) = kkt_and_subgradient(s, &theta, &w, support, cfg.lambda);
    let mut sweeps = 0;
    let mut dual_excess = T::zero();
    let slack = T::lit(1e-10).max(T::epsilon() * T::lit(100.0));

    // Sweeps the current sign pattern has survived, and the last pattern
    // refined with its sweep, so a refinement is not repeated at once.
    let mut pattern = newton::sign_pattern(&theta);
    let mut stable = 0;
    let mut refined: Option<(Vec<_>, usize)> = None;

    while kkt > cfg.tol && sweeps < cfg.max_outer_sweeps {
        for j in 0..p {
            let excess = state.update_column(j, s, support, cfg);
            dual_excess = dual_excess.max(excess);
        }
        sweeps += 1;

        theta = state.theta_matrix();
        let mut chol = cholesky(&theta)?;
        let mut next = objective_with(s, &theta, &chol, cfg.lambda)?;
        if next > obj + slack * obj.abs().max(T::one()) {
            return Err(Error::ObjectiveIncreased { sweep: sweeps, before: obj.as_f64(), after: next.as_f64() });
        }

        let current = newton::sign_pattern(&theta);
        if current == pattern {
            stable += 1;
        } else {
            pattern = current;
            stable = 0;
        }
        let retry = match &refined {
            Some((pat, at)) => *pat != pattern || sweeps >= at + REFINE_RETRY,
            None => true,
        };
        if stable >= REFINE_AFTER && retry {
            if let Some(r) = newton::refine(s, &theta, next, cfg.lambda, cfg.tol * T::lit(0.1), 50) {
                theta = r.theta;
                chol = r.chol;
                next = r.objective;
                state.theta = theta.as_slice().to_vec();
            }
            refined = Some((pattern.clone(), sweeps));
        }

        w = chol.inverse();
        state.w = w.as_slice().to_vec();
        obj = next;
        trace.push(obj);
        kkt = kkt_and_subgradient(s, &theta, &w, support, cfg.lambda).0;
    }
    Ok(finish(s, support, cfg, theta, w, sweeps, obj, trace, dual_excess))
}

#[allow(clippy::too_many_arguments)]
fn finish<T: Scalar>(
    s: &SymMatrix<T>,
    support: &Support,
    cfg: &SolverConfig<T>,
    theta: SymMatrix<T>,
    w: SymMatrix<T>,
    sweeps: usize,
    objective: T,
    objective_trace: Vec<T>,
    max_dual_excess: T,
) -> SolveResult<T> {
    let (kkt_residual, z_hat) = kkt_and_subgradient(s, &theta, &w, support, cfg.lambda);
    SolveResult {
        theta_hat: theta,
        w_hat: w,
        z_hat,
        sweeps,
        converged: kkt_residual <= cfg.tol,
        kkt_residual,
        objective,
        objective_trace,
        max_dual_excess,
        lambda: cfg.lambda,
    }
}

/// KKT residual over support coordinates and the matching subgradient.
/// For zero entries the subgradient is `(W - S) / lambda` clamped to `[-1, 1]`.
fn kkt_and_subgradient<T: Scalar>(
    s: &SymMatrix<T>,
    theta: &SymMatrix<T>,
    w: &SymMatrix<T>,
    support: &Support,
    lambda: T,
) -> (T, SymMatrix<T>) {
    let mut worst = T::zero();
    let z = SymMatrix::from_upper_fn(s.dim(), |i, j| {
        let gap = w.get(i, j) - s.get(i, j);
        if i == j {
            worst = worst.max(gap.abs());
            return T::zero();
        }
        if !support.contains(i, j) {
            return T::zero();
        }
        let t = theta.get(i, j);
        if t != T::zero() {
            let z = sign(t);
            worst = worst.max((lambda * z - gap).abs());
            z
        } else {
            worst = worst.max(gap.abs() - lambda);
            if lambda > T::zero() {
                (gap / lambda).max(-T::one()).min(T::one())
            } else {
                T::zero()
            }
        }
    });
    (worst, z)
}

/// Working buffers: `theta` and `w = theta^{-1}`, both row-major `p x p`.
struct State<T> {
    p: usize,
    theta: Vec<T>,
    w: Vec<T>,
}

impl<T: Scalar> State<T> {
    fn init(s: &SymMatrix<T>, init: Init) -> Self {
        let p = s.dim();
        let mut theta = vec![T::zero(); p * p];
        let mut w = vec![T::zero(); p * p];
        for i in 0..p {
            let (t, wi) = match init {
                Init::Diagonal => (T::one() / s.get(i, i), s.get(i, i)),
                Init::Identity => (T::one(), T::one()),
            };
            theta[i * p + i] = t;
            w[i * p + i] = wi;
        }
        Self { p, theta, w }
    }

    fn theta_matrix(&self) -> SymMatrix<T> {
        SymMatrix::from_raw(self.p, self.theta.clone())
    }

    /// Exact minimization over column/row `j`. Returns the largest dual
    /// excess `(|w_kj - s_kj| - lambda)_+` over the free coordinates.
    fn update_column(&mut self, j: usize, s: &SymMatrix<T>, support: &Support, cfg: &SolverConfig<T>) -> T {
        let p = self.p;
        let others: Vec<usize> = (0..p).filter(|&k| k != j).collect();
        let m = others.len();
        let w22 = self.w[j * p + j];
        let w12: Vec<T> = others.iter().map(|&k| self.w[k * p + j]).collect();

        // A = (Theta_{-j,-j})^{-1} = W11 - w12 w12^T / w22.
        let mut a = vec![T::zero(); m * m];
        for (x, &kx) in others.iter().enumerate() {
            for y in x..m {
                let v = self.w[kx * p + others[y]] - w12[x] * w12[y] / w22;
                a[x * m + y] = v;
                a[y * m + x] = v;
            }
        }

        let s22 = s.get(j, j);
        let s12: Vec<T> = others.iter().map(|&k| s.get(k, j)).collect();
        let free: Vec<usize> = (0..m).filter(|&x| support.contains(others[x], j)).collect();
        let mut beta: Vec<T> = others.iter().map(|&k| self.theta[k * p + j]).collect();
        let mut u = lasso::mat_vec(&a, m, &beta);

        lasso::solve(
            lasso::Problem { a: &a, m, scale: s22, linear: &s12, lambda: cfg.lambda, free: &free },
            &mut beta,
            &mut u,
            cfg.inner_tol,
            cfg.max_inner_passes,
        );

        let excess = free.iter().map(|&x| (s22 * u[x] + s12[x]).abs() - cfg.lambda).fold(T::zero(), T::max);

        let theta22 = T::one() / s22 + beta.iter().zip(&u).map(|(&b, &v)| b * v).sum::<T>();
        for (x, &k) in others.iter().enumerate() {
            self.theta[k * p + j] = beta[x];
            self.theta[j * p + k] = beta[x];
        }
        self.theta[j * p + j] = theta22;

        self.w[j * p + j] = s22;
        for (x, &kx) in others.iter().enumerate() {
            let wx = -s22 * u[x];
            self.w[kx * p + j] = wx;
            self.w[j * p + kx] = wx;
            for (y, &ky) in others.iter().enumerate().skip(x) {
                let v = a[x * m + y] + s22 * u[x] * u[y];
                self.w[kx * p + ky] = v;
                self.w[ky * p + kx] = v;
            }
        }
        excess
    }
}

#[cfg(test)]
mod tests;
