use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparseprec")).args(args).output().expect("spawn sparseprec")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn solve_writes_estimate_dual_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let cov = dir.path().join("cov.csv");
    fs::write(&cov, "# covariance\n1.0,0.3,0.05\n0.3,1.0,0.3\n0.05,0.3,1.0\n").unwrap();
    let (theta, z, report) = (dir.path().join("theta.csv"), dir.path().join("z.csv"), dir.path().join("r.json"));
    ok(&[
        "solve",
        "--input",
        p(&cov),
        "--lambda",
        "0.1",
        "--tol",
        "1e-9",
        "--max-sweeps",
        "200",
        "--out",
        p(&theta),
        "--dual-out",
        p(&z),
        "--report",
        p(&report),
    ]);
    let rows: Vec<Vec<f64>> = fs::read_to_string(&theta)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][2], 0.0);
    assert!(rows[0][1] < 0.0);
    let r = json(&report);
    assert_eq!(r["converged"], true);
    assert_eq!(r["lambda"], 0.1);
    assert!(r["kkt_residual"].as_f64().unwrap() <= 1e-9);
    for key in ["sweeps", "objective"] {
        assert!(r.get(key).is_some(), "report lacks {key}");
    }
    assert!(fs::read_to_string(&z).unwrap().lines().count() == 3);
}

#[test]
fn solve_rejects_asymmetric_input_unless_asked() {
    let dir = tempfile::tempdir().unwrap();
    let cov = dir.path().join("cov.csv");
    fs::write(&cov, "1.0,0.3\n0.2,1.0\n").unwrap();
    let out = dir.path().join("theta.csv");
    assert!(!run(&["solve", "--input", p(&cov), "--lambda", "0.1", "--out", p(&out)]).status.success());
    ok(&["solve", "--input", p(&cov), "--lambda", "0.1", "--out", p(&out), "--symmetrize"]);
}

#[test]
fn diagnose_reports_thresholds_with_one_based_edges() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.json");
    ok(&[
        "diagnose",
        "--family",
        "chain",
        "--p",
        "8",
        "--rho",
        "0.2",
        "--tail",
        "subgaussian:1",
        "--tau",
        "3",
        "--n",
        "400",
        "--out",
        p(&out),
    ]);
    let d = json(&out);
    assert_eq!(d["model"]["edges"][0], serde_json::json!([1, 2]));
    assert!(d["diagnostics"]["alpha"].as_f64().unwrap() > 0.0);
    assert!(d["thresholds"]["model_selection"].as_f64().unwrap() > 0.0);
    assert!(d["at_n"]["lambda_theory"].as_f64().unwrap() > 0.0);
}

#[test]
fn diagnose_explains_failed_incoherence() {
    let text = ok(&["diagnose", "--family", "diamond", "--rho", "0.3"]);
    let d: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(d["diagnostics"]["incoherent"], false);
    assert!(d["thresholds"]["ellinf"]["unavailable"].is_string());
}

#[test]
fn model_document_round_trips_through_diagnose() {
    let dir = tempfile::tempdir().unwrap();
    let (doc, sigma) = (dir.path().join("m.json"), dir.path().join("sigma.csv"));
    ok(&[
        "model",
        "--family",
        "star",
        "--p",
        "10",
        "--hub-d",
        "4",
        "--rho",
        "0.2",
        "--out",
        p(&doc),
        "--sigma-out",
        p(&sigma),
    ]);
    assert_eq!(fs::read_to_string(&sigma).unwrap().lines().count(), 10);
    let a = ok(&["diagnose", "--model", p(&doc)]);
    let b = ok(&["diagnose", "--family", "star", "--p", "10", "--hub-d", "4", "--rho", "0.2"]);
    assert_eq!(a, b);
}

#[test]
fn witness_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let args = |out: &Path| {
        vec![
            "witness".to_string(),
            "--family".into(),
            "chain".into(),
            "--p".into(),
            "8".into(),
            "--rho".into(),
            "0.3".into(),
            "--n".into(),
            "2000".into(),
            "--lambda".into(),
            "practical:1".into(),
            "--seed".into(),
            "7".into(),
            "--out".into(),
            p(out).into(),
        ]
    };
    ok(&args(&a).iter().map(String::as_str).collect::<Vec<_>>());
    ok(&args(&b).iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(fs::read_to_string(&a).unwrap(), fs::read_to_string(&b).unwrap());
    let w = json(&a);
    assert!(w["report"]["strict_dual_feasible"].is_boolean());
}

#[test]
fn simulate_emits_rows_aggregates_and_replayable_config() {
    let dir = tempfile::tempdir().unwrap();
    let (first, second) = (dir.path().join("one"), dir.path().join("two"));
    ok(&[
        "simulate",
        "--family",
        "chain",
        "--p",
        "8",
        "--rho",
        "0.3",
        "--n",
        "20:420:200",
        "--trials",
        "3",
        "--lambda",
        "practical:1",
        "--seed",
        "5",
        "--threads",
        "2",
        "--out",
        p(&first),
    ]);
    let rows = fs::read_to_string(first.join("rows.csv")).unwrap();
    assert!(rows
        .starts_with("family,p,d,n,trial,lambda,success,ell_inf,frob,spectral,cov_inf,cov_spec,witness_ok,converged"));
    assert_eq!(rows.lines().count(), 1 + 3 * 3);
    assert_eq!(fs::read_to_string(first.join("aggregates.csv")).unwrap().lines().count(), 1 + 3);
    let echo = first.join("config-echo.json");
    ok(&["simulate", "--config", p(&echo), "--out", p(&second)]);
    assert_eq!(rows, fs::read_to_string(second.join("rows.csv")).unwrap());
}

#[test]
fn rates_writes_slopes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rates");
    ok(&["rates", "--p", "32", "--n", "400:3200:*2", "--trials", "3", "--out", p(&out)]);
    let slopes = json(&out.join("slopes.json"));
    let row = &slopes[0];
    assert_eq!(row["p"], 32);
    assert_eq!(row["hub_degree"], 4);
    assert!(row["slope"].as_f64().unwrap() < 0.0);
}

#[test]
fn tailcheck_has_expected_header() {
    let text = ok(&[
        "tailcheck",
        "--family",
        "chain",
        "--p",
        "4",
        "--rho",
        "0.3",
        "--n",
        "100",
        "--trials",
        "50",
        "--deltas",
        "0.2,0.4",
    ]);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("delta,emp_rate,bound"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn bad_arguments_fail_cleanly() {
    assert!(!run(&["simulate", "--n", "5:1:1", "--out", "/nonexistent/x"]).status.success());
    assert!(!run(&["diagnose", "--family", "grid", "--p", "10", "--omega", "0.1"]).status.success());
    assert!(!run(&["witness", "--family", "chain", "--p", "8", "--rho", "0.3", "--n", "50", "--lambda", "bogus:1"])
        .status
        .success());
}
