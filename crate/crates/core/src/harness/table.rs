use std::cmp::Ordering;
use std::fs::{self, File};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One Monte Carlo trial. Field order is the CSV column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub family: String,
    pub p: usize,
    /// Maximum row cardinality of `Theta*`, diagonal included.
    pub d: usize,
    pub n: usize,
    pub trial: usize,
    pub lambda: f64,
    pub success: bool,
    pub ell_inf: f64,
    pub frob: f64,
    pub spectral: f64,
    /// `||Theta_hat^{-1} - Sigma*||_inf`.
    pub cov_inf: f64,
    /// `|||Theta_hat^{-1} - Sigma*|||_2`.
    pub cov_spec: f64,
    pub witness_ok: Option<bool>,
    pub converged: bool,
    pub n_over_log_p: f64,
    pub n_over_d: f64,
    pub strength: f64,
    pub hub_degree: usize,
    pub complexity_k: Option<f64>,
}

impl TrialOutcome {
    pub fn group(&self) -> GroupKey {
        GroupKey {
            family: self.family.clone(),
            p: self.p,
            d: self.d,
            hub_degree: self.hub_degree,
            strength: self.strength,
        }
    }

    fn order(&self, other: &Self) -> Ordering {
        self.group().cmp(&other.group()).then(self.n.cmp(&other.n)).then(self.trial.cmp(&other.trial))
    }
}

/// Identifies one model of a sweep; success curves are drawn per key.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupKey {
    pub family: String,
    pub p: usize,
    pub d: usize,
    pub hub_degree: usize,
    pub strength: f64,
}

impl Eq for GroupKey {}

impl PartialOrd for GroupKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GroupKey {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.family, self.p, self.hub_degree, self.d)
            .cmp(&(&other.family, other.p, other.hub_degree, other.d))
            .then(self.strength.total_cmp(&other.strength))
    }
}

/// Per `(model, n)` summary of the trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub family: String,
    pub p: usize,
    pub d: usize,
    pub hub_degree: usize,
    pub strength: f64,
    pub n: usize,
    pub trials: usize,
    pub success_rate: f64,
    /// Binomial standard error of `success_rate`.
    pub success_se: f64,
    pub mean_lambda: f64,
    pub mean_ell_inf: f64,
    pub median_ell_inf: f64,
    pub se_ell_inf: f64,
    pub mean_frob: f64,
    pub mean_spectral: f64,
    pub mean_cov_inf: f64,
    pub mean_cov_spec: f64,
    pub converged_rate: f64,
    pub witness_rate: Option<f64>,
    pub complexity_k: Option<f64>,
}

impl Aggregate {
    pub fn group(&self) -> GroupKey {
        GroupKey {
            family: self.family.clone(),
            p: self.p,
            d: self.d,
            hub_degree: self.hub_degree,
            strength: self.strength,
        }
    }
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let k = s.len();
    if k % 2 == 1 {
        s[k / 2]
    } else {
        0.5 * (s[k / 2 - 1] + s[k / 2])
    }
}

fn std_error(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64;
    (var / v.len() as f64).sqrt()
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResultTable {
    rows: Vec<TrialOutcome>,
}

impl ResultTable {
    /// Sorts rows by `(model, n, trial)` so the table does not depend on
    /// the order trials finished in.
    pub fn new(mut rows: Vec<TrialOutcome>) -> Self {
        rows.sort_by(TrialOutcome::order);
        Self { rows }
    }

    pub fn rows(&self) -> &[TrialOutcome] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn aggregates(&self) -> Vec<Aggregate> {
        let mut out = Vec::new();
        let mut start = 0;
        while start < self.rows.len() {
            let head = &self.rows[start];
            let end =
                start + self.rows[start..].iter().take_while(|r| r.group() == head.group() && r.n == head.n).count();
            out.push(summarize(&self.rows[start..end]));
            start = end;
        }
        out
    }

    pub fn write_rows_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        if self.rows.is_empty() {
            w.write_record(ROW_HEADER)?;
        }
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_rows_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let rows = rdr.deserialize().collect::<std::result::Result<Vec<TrialOutcome>, _>>()?;
        Ok(Self::new(rows))
    }

    pub fn write_aggregates_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let aggs = self.aggregates();
        if aggs.is_empty() {
            w.write_record(AGGREGATE_HEADER)?;
        }
        for a in aggs {
            w.serialize(a)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "rows": self.rows, "aggregates": self.aggregates() })
    }

    /// Writes `rows.csv` + `aggregates.csv`, or `results.json` holding both.
    pub fn emit(&self, format: OutputFormat, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        match format {
            OutputFormat::Csv => {
                self.write_rows_csv(File::create(dir.join("rows.csv"))?)?;
                self.write_aggregates_csv(File::create(dir.join("aggregates.csv"))?)?;
            }
            OutputFormat::Json => {
                serde_json::to_writer_pretty(File::create(dir.join("results.json"))?, &self.to_json())?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

pub const ROW_HEADER: [&str; 19] = [
    "family",
    "p",
    "d",
    "n",
    "trial",
    "lambda",
    "success",
    "ell_inf",
    "frob",
    "spectral",
    "cov_inf",
    "cov_spec",
    "witness_ok",
    "converged",
    "n_over_log_p",
    "n_over_d",
    "strength",
    "hub_degree",
    "complexity_k",
];

const AGGREGATE_HEADER: [&str; 20] = [
    "family",
    "p",
    "d",
    "hub_degree",
    "strength",
    "n",
    "trials",
    "success_rate",
    "success_se",
    "mean_lambda",
    "mean_ell_inf",
    "median_ell_inf",
    "se_ell_inf",
    "mean_frob",
    "mean_spectral",
    "mean_cov_inf",
    "mean_cov_spec",
    "converged_rate",
    "witness_rate",
    "complexity_k",
];

fn summarize(rows: &[TrialOutcome]) -> Aggregate {
    let head = &rows[0];
    let col = |f: fn(&TrialOutcome) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    let frac = |f: fn(&TrialOutcome) -> bool| rows.iter().filter(|r| f(r)).count() as f64 / rows.len() as f64;
    let success_rate = frac(|r| r.success);
    let ell = col(|r| r.ell_inf);
    let witness: Vec<bool> = rows.iter().filter_map(|r| r.witness_ok).collect();
    Aggregate {
        family: head.family.clone(),
        p: head.p,
        d: head.d,
        hub_degree: head.hub_degree,
        strength: head.strength,
        n: head.n,
        trials: rows.len(),
        success_rate,
        success_se: (success_rate * (1.0 - success_rate) / rows.len() as f64).sqrt(),
        mean_lambda: mean(&col(|r| r.lambda)),
        mean_ell_inf: mean(&ell),
        median_ell_inf: median(&ell),
        se_ell_inf: std_error(&ell),
        mean_frob: mean(&col(|r| r.frob)),
        mean_spectral: mean(&col(|r| r.spectral)),
        mean_cov_inf: mean(&col(|r| r.cov_inf)),
        mean_cov_spec: mean(&col(|r| r.cov_spec)),
        converged_rate: frac(|r| r.converged),
        witness_rate: (!witness.is_empty())
            .then(|| witness.iter().filter(|&&w| w).count() as f64 / witness.len() as f64),
        complexity_k: head.complexity_k,
    }
}
