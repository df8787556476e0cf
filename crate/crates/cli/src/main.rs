mod parse;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use sparse_precision::harness::{
    self, analysis, ExperimentConfig, FamilyKind, HubDegrees, LambdaRule, OutputFormat, ResultTable, Strength,
};
use sparse_precision::linalg::io::{read_sym_csv_file, write_sym_csv_file, SymmetryPolicy};
use sparse_precision::models::{
    build_chain, build_custom, build_diamond, build_grid, build_star, ModelDocument, ModelSpec,
};
use sparse_precision::sampling::{
    empirical_tail_check, sample_covariance, sample_gaussian, write_tail_check_csv, Seed,
};
use sparse_precision::solver::{solve, SolverConfig};
use sparse_precision::theory::{
    delta_bar, diagnostics, lambda_practical, predicted_bounds, threshold_ellinf, threshold_model_selection,
    witness_construct_with,
};
use sparse_precision::SymMatrix64;

#[derive(Parser)]
#[command(
    name = "sparseprec",
    version,
    about = "Sparse Gaussian graphical model estimation by l1-penalized log-determinant"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate a precision matrix from a covariance CSV.
    Solve(SolveArgs),
    /// Incoherence and conditioning constants of a model, with sample-size thresholds.
    Diagnose(DiagnoseArgs),
    /// Primal-dual witness on one sampled data set.
    Witness(WitnessArgs),
    /// Monte Carlo recovery sweep.
    Simulate(SweepArgs),
    /// Elementwise error decay sweep with fitted log-log slopes.
    Rates(RatesArgs),
    /// Empirical tail frequencies of the sample covariance against the bound.
    Tailcheck(TailcheckArgs),
    /// Write a model's JSON document and its matrices.
    Model(ModelArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Covariance matrix CSV.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    #[arg(long, default_value_t = 500)]
    max_sweeps: usize,
    /// Estimated precision matrix CSV.
    #[arg(long)]
    out: PathBuf,
    /// Subgradient matrix CSV.
    #[arg(long)]
    dual_out: Option<PathBuf>,
    /// JSON report.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Average the input with its transpose instead of rejecting asymmetry.
    #[arg(long)]
    symmetrize: bool,
}

#[derive(Args, Clone)]
struct ModelSource {
    /// Model JSON document; overrides the family options.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, value_parser = parse_family)]
    family: Option<FamilyKind>,
    #[arg(long)]
    p: Option<usize>,
    /// Edge strength for chain, star and diamond; `c/d` divides by the hub degree.
    #[arg(long)]
    rho: Option<String>,
    /// Edge strength for grid.
    #[arg(long)]
    omega: Option<f64>,
    /// Star hub degree.
    #[arg(long)]
    hub_d: Option<usize>,
    /// Precision matrix CSV for the custom family.
    #[arg(long)]
    theta: Option<PathBuf>,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[command(flatten)]
    source: ModelSource,
    /// gaussian, subgaussian:<sigma> or polynomial:<m>:<K>.
    #[arg(long, default_value = "gaussian")]
    tail: String,
    #[arg(long, default_value_t = 3.0)]
    tau: f64,
    /// Also report lambda and predicted error bounds at this sample size.
    #[arg(long)]
    n: Option<usize>,
    /// Output JSON; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct WitnessArgs {
    #[command(flatten)]
    source: ModelSource,
    #[arg(long)]
    n: usize,
    /// A number, `theory[:tau]` or `practical[:c]`.
    #[arg(long, default_value = "theory")]
    lambda: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct SweepArgs {
    /// Replay a `config-echo.json`; the sweep options below are ignored.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    name: Option<String>,
    #[arg(long, value_parser = parse_family)]
    family: Option<FamilyKind>,
    /// Comma-separated dimensions.
    #[arg(long)]
    p: Option<String>,
    /// Comma-separated strengths; `c/d` divides by the hub degree.
    #[arg(long, conflicts_with = "omega")]
    rho: Option<String>,
    /// Comma-separated grid strengths.
    #[arg(long)]
    omega: Option<String>,
    /// Star hub degrees: a list, or `frac:<f>` for ceil(f * p).
    #[arg(long)]
    hub_d: Option<String>,
    /// Sample sizes: a list, `start:stop:step` or `start:stop:*factor`.
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    /// `theory:<tau>`, `practical:<c>` or `fixed:<value>`.
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; all cores when absent. Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Run the primal-dual witness on every trial.
    #[arg(long)]
    witness: bool,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_sweeps: Option<usize>,
    #[arg(long)]
    zero_threshold: Option<f64>,
    /// Precision matrix CSV for the custom family.
    #[arg(long)]
    theta: Option<PathBuf>,
}

#[derive(Args)]
struct RatesArgs {
    #[command(flatten)]
    sweep: SweepArgs,
    /// Slopes use the points with n / log p at or above this value.
    #[arg(long, default_value_t = 40.0)]
    min_rescaled: f64,
}

#[derive(Args)]
struct TailcheckArgs {
    #[command(flatten)]
    source: ModelSource,
    #[arg(long)]
    n: usize,
    /// Comma-separated deviation levels.
    #[arg(long, default_value = "0.05,0.1,0.2,0.3,0.5")]
    deltas: String,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ModelArgs {
    #[command(flatten)]
    source: ModelSource,
    /// Model JSON document; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    sigma_out: Option<PathBuf>,
    #[arg(long)]
    theta_out: Option<PathBuf>,
}

fn parse_family(s: &str) -> Result<FamilyKind, String> {
    s.parse().map_err(|e: sparse_precision::Error| e.to_string())
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Diagnose(a) => cmd_diagnose(a),
        Command::Witness(a) => cmd_witness(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Rates(a) => cmd_rates(a),
        Command::Tailcheck(a) => cmd_tailcheck(a),
        Command::Model(a) => cmd_model(a),
    }
}

fn write_json(out: Option<&Path>, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn cmd_solve(a: SolveArgs) -> Result<()> {
    let policy = if a.symmetrize { SymmetryPolicy::Symmetrize } else { SymmetryPolicy::Strict };
    let s: SymMatrix64 =
        read_sym_csv_file(&a.input, policy).with_context(|| format!("reading {}", a.input.display()))?;
    let mut cfg = SolverConfig::new(a.lambda).with_tol(a.tol);
    cfg.max_outer_sweeps = a.max_sweeps;
    let fit = solve(&s, &cfg)?;
    write_sym_csv_file(&a.out, &fit.theta_hat, None).with_context(|| format!("writing {}", a.out.display()))?;
    if let Some(path) = &a.dual_out {
        write_sym_csv_file(path, &fit.z_hat, None).with_context(|| format!("writing {}", path.display()))?;
    }
    let report = json!({
        "lambda": fit.lambda,
        "sweeps": fit.sweeps,
        "kkt_residual": fit.kkt_residual,
        "converged": fit.converged,
        "objective": fit.objective,
    });
    if let Some(path) = &a.report {
        write_json(Some(path), &report)?;
    }
    if !fit.converged {
        bail!("no convergence after {} sweeps (kkt residual {:.3e})", fit.sweeps, fit.kkt_residual);
    }
    Ok(())
}

fn load_model(src: &ModelSource) -> Result<ModelSpec<f64>> {
    if let Some(path) = &src.model {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let doc: ModelDocument = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        return Ok(ModelSpec::from_document(&doc)?);
    }
    let Some(family) = src.family else { bail!("give --model or --family") };
    let rho = || -> Result<f64> {
        let raw = src.rho.as_deref().context("--rho is required for this family")?;
        Ok(parse::strength(raw)?.resolve(src.hub_d.unwrap_or(1)))
    };
    let p = || src.p.context("--p is required for this family");
    let model = match family {
        FamilyKind::Chain => build_chain(p()?, rho()?)?,
        FamilyKind::Star => build_star(p()?, src.hub_d.context("--hub-d is required for star")?, rho()?)?,
        FamilyKind::Grid => {
            let p = p()?;
            let side = (p as f64).sqrt().round() as usize;
            if side * side != p {
                bail!("grid needs a square p, got {p}");
            }
            build_grid(side, src.omega.context("--omega is required for grid")?)?
        }
        FamilyKind::Diamond => build_diamond(rho()?)?,
        FamilyKind::Custom => {
            let path = src.theta.as_ref().context("--theta is required for custom")?;
            build_custom(read_sym_csv_file(path, SymmetryPolicy::Strict)?)?
        }
    };
    Ok(model)
}

fn cmd_diagnose(a: DiagnoseArgs) -> Result<()> {
    let model = load_model(&a.source)?;
    let p = model.p();
    let diag = diagnostics(&model)?;
    let tail = parse::tail(&a.tail, model.max_variance())?;
    // Thresholds need alpha > 0; report the reason instead of failing.
    let or_reason = |r: sparse_precision::Result<f64>| match r {
        Ok(v) => json!(v),
        Err(e) => json!({ "unavailable": e.to_string() }),
    };
    let mut out = json!({
        "model": model.to_document(),
        "diagnostics": diag,
        "tail": tail,
        "tau": a.tau,
        "thresholds": {
            "ellinf": or_reason(threshold_ellinf(&diag, &tail, p, a.tau)),
            "model_selection": or_reason(threshold_model_selection(&diag, &tail, p, a.tau)),
        },
    });
    if let Some(n) = a.n {
        let theory = diag
            .require_alpha()
            .and_then(|alpha| sparse_precision::theory::lambda_theory(alpha.min(1.0), &tail, n, p, a.tau));
        out["at_n"] = json!({
            "n": n,
            "delta_bar": or_reason(delta_bar(&tail, n, p, a.tau)),
            "lambda_theory": or_reason(theory),
            "lambda_practical_c1": lambda_practical(1.0, n, p),
            "predicted_bounds": match predicted_bounds(&diag, &tail, n, p, a.tau) {
                Ok(b) => json!(b),
                Err(e) => json!({ "unavailable": e.to_string() }),
            },
        });
    }
    write_json(a.out.as_deref(), &out)
}

fn cmd_witness(a: WitnessArgs) -> Result<()> {
    let model = load_model(&a.source)?;
    let p = model.p();
    let diag = diagnostics(&model)?;
    let rule: LambdaRule = a.lambda.parse()?;
    let lambda = harness::lambda_for(rule, &diag, a.n, p)?;
    let data = sample_gaussian(&model, a.n, &Seed::new(a.seed).named("witness"))?;
    let s = sample_covariance(&data);
    let cfg = SolverConfig::new(lambda).with_tol(a.tol);
    let report = witness_construct_with(&model, &diag, &s, lambda, &cfg)?;
    let recovered =
        report.full_result.as_ref().map(|fit| harness::success_predicate(&fit.theta_hat, &model, model.zero_threshold));
    let out = json!({
        "model": model.to_document(),
        "n": a.n,
        "seed": a.seed,
        "lambda_rule": rule,
        "report": report,
        "full_solve_recovers_signed_edges": recovered,
    });
    write_json(a.out.as_deref(), &out)
}

struct SweepDefaults {
    name: &'static str,
    family: FamilyKind,
    p: &'static str,
    rho: &'static str,
    hub_d: &'static str,
    n: &'static str,
}

fn sweep_config(a: &SweepArgs, def: &SweepDefaults) -> Result<ExperimentConfig> {
    if let Some(path) = &a.config {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        return serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()));
    }
    let family = a.family.unwrap_or(def.family);
    let p_list = parse::list(a.p.as_deref().unwrap_or(def.p))?;
    let strengths = match (&a.rho, &a.omega) {
        (Some(r), _) => parse::strengths(r)?,
        (None, Some(o)) => parse::list::<f64>(o)?.into_iter().map(Strength::Fixed).collect(),
        (None, None) if family == FamilyKind::Grid => vec![Strength::Fixed(0.1)],
        (None, None) => parse::strengths(def.rho)?,
    };
    let n_grid = parse::n_grid(a.n.as_deref().unwrap_or(def.n))?;
    let mut cfg = ExperimentConfig::new(a.name.as_deref().unwrap_or(def.name), family, p_list, strengths[0], n_grid);
    cfg.strengths = strengths;
    if family == FamilyKind::Star {
        cfg.hub_degrees = Some(parse::hub_degrees(a.hub_d.as_deref().unwrap_or(def.hub_d))?);
    }
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    if let Some(rule) = &a.lambda {
        cfg.lambda_rule = rule.parse()?;
    }
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(tol) = a.tol {
        cfg.solver.tol = tol;
    }
    if let Some(k) = a.max_sweeps {
        cfg.solver.max_outer_sweeps = k;
    }
    cfg.witness = a.witness;
    cfg.zero_threshold = a.zero_threshold;
    if let Some(path) = &a.theta {
        let theta: SymMatrix64 = read_sym_csv_file(path, SymmetryPolicy::Strict)?;
        cfg.custom_theta = Some(theta.to_rows());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn set_threads(threads: Option<usize>) -> Result<()> {
    if let Some(k) = threads {
        rayon::ThreadPoolBuilder::new().num_threads(k).build_global().context("configuring the thread pool")?;
    }
    Ok(())
}

fn emit(table: &ResultTable, cfg: &ExperimentConfig, a: &SweepArgs) -> Result<()> {
    let format = match a.format {
        Format::Csv => OutputFormat::Csv,
        Format::Json => OutputFormat::Json,
    };
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    harness::emit(table, cfg, format, &a.out)?;
    Ok(())
}

fn cmd_simulate(a: SweepArgs) -> Result<()> {
    let def = SweepDefaults {
        name: "simulate",
        family: FamilyKind::Chain,
        p: "16,32,64",
        rho: "0.2",
        hub_d: "4,8,16",
        n: "50:3200:*2",
    };
    let cfg = sweep_config(&a, &def)?;
    set_threads(a.threads)?;
    let table = if cfg.family == FamilyKind::Star && matches!(cfg.hub_degrees, Some(HubDegrees::List(_))) {
        harness::run_degree_sweep(&cfg)?
    } else if cfg.strengths.len() > 1 {
        harness::run_complexity_sweep(&cfg)?
    } else {
        harness::run_model_selection(&cfg)?
    };
    emit(&table, &cfg, &a)?;

    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "family\tp\td\tstrength\tn50\tn50/log p\tn50/d")?;
    for (key, curve) in analysis::curves(&table) {
        let n50 = analysis::n50(&curve);
        let show = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.1}"));
        let log_p = (key.p as f64).ln();
        writeln!(
            stdout,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            key.family,
            key.p,
            key.d,
            key.strength,
            show(n50),
            show(n50.map(|v| v / log_p)),
            show(n50.map(|v| v / key.d as f64)),
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SlopeRow {
    p: usize,
    d: usize,
    hub_degree: usize,
    strength: f64,
    points: usize,
    slope: Option<f64>,
}

fn cmd_rates(a: RatesArgs) -> Result<()> {
    let def = SweepDefaults {
        name: "rates",
        family: FamilyKind::Star,
        p: "32,64",
        rho: "2.5/d",
        hub_d: "frac:0.1",
        n: "100:25600:*2",
    };
    let cfg = sweep_config(&a.sweep, &def)?;
    set_threads(a.sweep.threads)?;
    let table = harness::run_ellinf_rate(&cfg)?;
    emit(&table, &cfg, &a.sweep)?;

    let mut slopes = Vec::new();
    for (key, curve) in analysis::curves(&table) {
        let log_p = (key.p as f64).ln();
        let (xs, ys): (Vec<f64>, Vec<f64>) =
            curve.iter().filter(|g| g.n as f64 / log_p >= a.min_rescaled).map(|g| (g.n as f64, g.mean_ell_inf)).unzip();
        let slope = (xs.len() >= 2).then(|| analysis::loglog_slope(&xs, &ys));
        slopes.push(SlopeRow {
            p: key.p,
            d: key.d,
            hub_degree: key.hub_degree,
            strength: key.strength,
            points: xs.len(),
            slope,
        });
    }
    write_json(Some(&a.sweep.out.join("slopes.json")), &slopes)?;
    for row in &slopes {
        let slope = row.slope.map_or("-".to_string(), |s| format!("{s:.3}"));
        println!("p={} d={} points={} slope={}", row.p, row.d, row.points, slope);
    }
    Ok(())
}

fn cmd_tailcheck(a: TailcheckArgs) -> Result<()> {
    let model = load_model(&a.source)?;
    let deltas: Vec<f64> = parse::list(&a.deltas)?;
    let rows = empirical_tail_check(&model, a.n, &deltas, a.trials, &Seed::new(a.seed).named("tailcheck"))?;
    match &a.out {
        Some(path) => write_tail_check_csv(fs::File::create(path)?, &rows)?,
        None => write_tail_check_csv(std::io::stdout().lock(), &rows)?,
    }
    Ok(())
}

fn cmd_model(a: ModelArgs) -> Result<()> {
    let model = load_model(&a.source)?;
    if let Some(path) = &a.sigma_out {
        write_sym_csv_file(path, &model.sigma_star, None)?;
    }
    if let Some(path) = &a.theta_out {
        write_sym_csv_file(path, &model.theta_star, None)?;
    }
    write_json(a.out.as_deref(), &model.to_document())
}
