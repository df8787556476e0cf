//! Deterministic, parallel Monte Carlo sweeps over models, sample sizes and
//! trials.
//!
//! Every trial draws from its own random stream, derived from the root seed,
//! the experiment name and the trial's key `(p, hub degree, strength, n,
//! trial)`. Trials run on the rayon pool and the table is sorted by key, so
//! results do not depend on the number of threads.

pub mod analysis;
mod config;
mod table;

use std::fs;
use std::path::Path;

use rayon::prelude::*;

pub use config::{ExperimentConfig, FamilyKind, HubDegrees, Instance, LambdaRule, SolverSettings, Strength};
pub use table::{Aggregate, GroupKey, OutputFormat, ResultTable, TrialOutcome, ROW_HEADER};

use crate::error::{Error, Result};
use crate::linalg::{norm_elem_max, norm_frobenius, norm_spectral, SymMatrix};
use crate::models::{signed_edge_set, ModelSpec};
use crate::sampling::{sample_covariance, sample_gaussian, Seed};
use crate::solver::solve;
use crate::theory::{diagnostics, lambda_practical, lambda_theory, witness_construct_with, Diagnostics, TailModel};

/// Whether `theta_hat` has exactly the model's signed edge set.
pub fn success_predicate(theta_hat: &SymMatrix<f64>, model: &ModelSpec<f64>, zero_threshold: f64) -> bool {
    signed_edge_set(theta_hat, zero_threshold) == model.signed_edges()
}

/// Regularization for one trial.
pub fn lambda_for(rule: LambdaRule, diag: &Diagnostics<f64>, n: usize, p: usize) -> Result<f64> {
    match rule {
        LambdaRule::Theory { tau } => {
            let alpha = diag.require_alpha()?;
            lambda_theory(alpha.min(1.0), &TailModel::gaussian(diag.max_var), n, p, tau)
        }
        LambdaRule::Practical { c } => Ok(lambda_practical(c, n, p)),
        LambdaRule::Fixed { value } => Ok(value),
    }
}

/// Signed-support recovery versus `n` over every model of the config.
pub fn run_model_selection(cfg: &ExperimentConfig) -> Result<ResultTable> {
    run(cfg)
}

/// Elementwise error decay versus `n`; identical sweep, the `ell_inf` column
/// is the quantity of interest.
pub fn run_ellinf_rate(cfg: &ExperimentConfig) -> Result<ResultTable> {
    run(cfg)
}

/// Star models over a list of hub degrees.
pub fn run_degree_sweep(cfg: &ExperimentConfig) -> Result<ResultTable> {
    if cfg.family != FamilyKind::Star || !matches!(cfg.hub_degrees, Some(HubDegrees::List(_))) {
        return Err(Error::InvalidParameter("degree sweep needs a star family with a hub degree list".into()));
    }
    run(cfg)
}

/// Sweep over edge strengths; every row carries the model's complexity `K`.
pub fn run_complexity_sweep(cfg: &ExperimentConfig) -> Result<ResultTable> {
    if cfg.strengths.len() < 2 {
        return Err(Error::InvalidParameter("complexity sweep needs at least two strengths".into()));
    }
    run(cfg)
}

struct Prepared {
    inst: Instance,
    diag: Diagnostics<f64>,
}

fn run(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let prepared: Vec<Prepared> = cfg
        .instances()?
        .into_par_iter()
        .map(|inst| Ok(Prepared { diag: diagnostics(&inst.model)?, inst }))
        .collect::<Result<_>>()?;
    let work: Vec<(usize, usize, usize)> = (0..prepared.len())
        .flat_map(|m| cfg.n_grid.iter().flat_map(move |&n| (0..cfg.trials).map(move |t| (m, n, t))))
        .collect();
    let root = Seed::new(cfg.seed).named(&cfg.name);
    let rows =
        work.into_par_iter().map(|(m, n, t)| run_trial(cfg, &prepared[m], &root, n, t)).collect::<Result<Vec<_>>>()?;
    Ok(ResultTable::new(rows))
}

fn trial_seed(root: &Seed, inst: &Instance, n: usize, trial: usize) -> Seed {
    root.child(inst.model.p() as u64)
        .child(inst.hub_degree as u64)
        .child(inst.strength.to_bits())
        .child(n as u64)
        .child(trial as u64)
}

fn run_trial(cfg: &ExperimentConfig, prep: &Prepared, root: &Seed, n: usize, trial: usize) -> Result<TrialOutcome> {
    let model = &prep.inst.model;
    let p = model.p();
    let data = sample_gaussian(model, n, &trial_seed(root, &prep.inst, n, trial))?;
    let sigma_hat = sample_covariance(&data);
    let lambda = lambda_for(cfg.lambda_rule, &prep.diag, n, p)?;
    let solver = cfg.solver.config(lambda);
    let fit = solve(&sigma_hat, &solver)?;
    let thr = cfg.zero_threshold.unwrap_or(model.zero_threshold);

    let err = fit.theta_hat.sub(&model.theta_star)?;
    let cov_err = fit.w_hat.sub(&model.sigma_star)?;
    let witness_ok = if cfg.witness && lambda > 0.0 {
        Some(witness_construct_with(model, &prep.diag, &sigma_hat, lambda, &solver)?.strict_dual_feasible)
    } else {
        None
    };
    Ok(TrialOutcome {
        family: cfg.family.name().to_string(),
        p,
        d: model.degree_d,
        n,
        trial,
        lambda,
        success: success_predicate(&fit.theta_hat, model, thr),
        ell_inf: norm_elem_max(&err),
        frob: norm_frobenius(&err),
        spectral: norm_spectral(&err)?,
        cov_inf: norm_elem_max(&cov_err),
        cov_spec: norm_spectral(&cov_err)?,
        witness_ok,
        converged: fit.converged,
        n_over_log_p: n as f64 / (p as f64).ln(),
        n_over_d: n as f64 / model.degree_d as f64,
        strength: prep.inst.strength,
        hub_degree: prep.inst.hub_degree,
        complexity_k: prep.diag.complexity_k,
    })
}

/// Writes the table plus `config-echo.json`, which replays the run exactly.
pub fn emit(table: &ResultTable, cfg: &ExperimentConfig, format: OutputFormat, dir: &Path) -> Result<()> {
    table.emit(format, dir)?;
    fs::write(dir.join("config-echo.json"), serde_json::to_string_pretty(cfg)?)?;
    Ok(())
}
