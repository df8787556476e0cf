use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::models::{build_chain, build_custom, build_diamond, build_grid, build_star, ModelSpec};
use crate::solver::{Init, SolverConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Chain,
    Grid,
    Star,
    Diamond,
    Custom,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Chain => "chain",
            FamilyKind::Grid => "grid",
            FamilyKind::Star => "star",
            FamilyKind::Diamond => "diamond",
            FamilyKind::Custom => "custom",
        }
    }
}

impl std::str::FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chain" => Ok(FamilyKind::Chain),
            "grid" => Ok(FamilyKind::Grid),
            "star" => Ok(FamilyKind::Star),
            "diamond" => Ok(FamilyKind::Diamond),
            "custom" => Ok(FamilyKind::Custom),
            other => Err(Error::Parse(format!("unknown family `{other}`"))),
        }
    }
}

/// Edge strength: `rho` for chain/star/diamond, `omega` for grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Strength {
    Fixed(f64),
    /// `c / d` with `d` the star hub degree.
    OverHubDegree(f64),
}

impl Strength {
    pub fn resolve(self, hub_degree: usize) -> f64 {
        match self {
            Strength::Fixed(v) => v,
            Strength::OverHubDegree(c) => c / hub_degree as f64,
        }
    }
}

/// Hub degrees used for star models.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum HubDegrees {
    List(Vec<usize>),
    /// `ceil(fraction * p)`.
    FractionOfP(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "lowercase")]
pub enum LambdaRule {
    /// `(8 / alpha) * delta_bar(n, p^tau)` with the Gaussian tail function.
    Theory {
        tau: f64,
    },
    /// `c * sqrt(log p / n)`.
    Practical {
        c: f64,
    },
    Fixed {
        value: f64,
    },
}

impl std::str::FromStr for LambdaRule {
    type Err = Error;

    /// `theory:<tau>`, `practical:<c>`, `fixed:<value>` or a bare number.
    fn from_str(s: &str) -> Result<Self> {
        let num = |v: &str| v.trim().parse::<f64>().map_err(|e| Error::Parse(format!("lambda rule `{s}`: {e}")));
        match s.split_once(':') {
            Some(("theory", v)) => Ok(LambdaRule::Theory { tau: num(v)? }),
            Some(("practical", v)) => Ok(LambdaRule::Practical { c: num(v)? }),
            Some(("fixed", v)) => Ok(LambdaRule::Fixed { value: num(v)? }),
            None if s == "theory" => Ok(LambdaRule::Theory { tau: 3.0 }),
            None if s == "practical" => Ok(LambdaRule::Practical { c: 1.0 }),
            None => Ok(LambdaRule::Fixed { value: num(s)? }),
            _ => Err(Error::Parse(format!("unknown lambda rule `{s}`"))),
        }
    }
}

/// Serializable subset of [`SolverConfig`] (lambda is set per trial).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub tol: f64,
    pub max_outer_sweeps: usize,
    pub inner_tol: f64,
    #[serde(default)]
    pub init: Init,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let c = SolverConfig::<f64>::new(0.0);
        Self { tol: c.tol, max_outer_sweeps: c.max_outer_sweeps, inner_tol: c.inner_tol, init: c.init }
    }
}

impl SolverSettings {
    pub fn config(&self, lambda: f64) -> SolverConfig<f64> {
        let mut c = SolverConfig::new(lambda);
        c.tol = self.tol;
        c.max_outer_sweeps = self.max_outer_sweeps;
        c.inner_tol = self.inner_tol;
        c.init = self.init;
        c
    }
}

/// Everything that determines an experiment's output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Label mixed into the seed, so different experiments draw different data.
    pub name: String,
    pub family: FamilyKind,
    pub p_list: Vec<usize>,
    /// Star only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hub_degrees: Option<HubDegrees>,
    pub strengths: Vec<Strength>,
    pub n_grid: Vec<usize>,
    pub trials: usize,
    pub lambda_rule: LambdaRule,
    pub seed: u64,
    #[serde(default)]
    pub solver: SolverSettings,
    /// Run the primal-dual witness on every trial.
    #[serde(default)]
    pub witness: bool,
    /// Threshold for declaring estimated entries nonzero; defaults to the
    /// model's structural threshold.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_threshold: Option<f64>,
    /// Custom family only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom_theta: Option<Vec<Vec<f64>>>,
}

impl ExperimentConfig {
    pub fn new(name: &str, family: FamilyKind, p_list: Vec<usize>, strength: Strength, n_grid: Vec<usize>) -> Self {
        Self {
            name: name.to_string(),
            family,
            p_list,
            hub_degrees: None,
            strengths: vec![strength],
            n_grid,
            trials: 50,
            lambda_rule: LambdaRule::Practical { c: 1.0 },
            seed: 0,
            solver: SolverSettings::default(),
            witness: false,
            zero_threshold: None,
            custom_theta: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.p_list.is_empty() || self.n_grid.is_empty() || self.strengths.is_empty() {
            return bad("p_list, n_grid and strengths must be non-empty");
        }
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.n_grid.contains(&0) {
            return bad("sample sizes must be positive");
        }
        match self.lambda_rule {
            LambdaRule::Theory { tau } if !(tau > 2.0) => return bad("theory lambda needs tau > 2"),
            LambdaRule::Practical { c } if !(c > 0.0) => return bad("practical lambda needs c > 0"),
            LambdaRule::Fixed { value } if !(value >= 0.0) => return bad("fixed lambda must be >= 0"),
            _ => {}
        }
        if self.family == FamilyKind::Star && self.hub_degrees.is_none() {
            return bad("star experiments need hub_degrees");
        }
        if self.family == FamilyKind::Custom && self.custom_theta.is_none() {
            return bad("custom experiments need custom_theta");
        }
        Ok(())
    }

    /// Every model instance of the sweep, in a fixed order.
    pub fn instances(&self) -> Result<Vec<Instance>> {
        self.validate()?;
        let mut out = Vec::new();
        for &p in &self.p_list {
            let hubs: Vec<usize> = match (&self.family, &self.hub_degrees) {
                (FamilyKind::Star, Some(HubDegrees::List(v))) => v.clone(),
                (FamilyKind::Star, Some(HubDegrees::FractionOfP(f))) => vec![(f * p as f64).ceil() as usize],
                _ => vec![0],
            };
            for hub in hubs {
                for &strength in &self.strengths {
                    let value = strength.resolve(hub.max(1));
                    let model = self.build(p, hub, value)?;
                    out.push(Instance { hub_degree: hub, strength: value, model });
                }
            }
        }
        Ok(out)
    }

    fn build(&self, p: usize, hub: usize, value: f64) -> Result<ModelSpec<f64>> {
        match self.family {
            FamilyKind::Chain => build_chain(p, value),
            FamilyKind::Star => build_star(p, hub, value),
            FamilyKind::Grid => {
                let side = (p as f64).sqrt().round() as usize;
                if side * side != p {
                    return Err(Error::InvalidParameter(format!("grid needs a square p, got {p}")));
                }
                build_grid(side, value)
            }
            FamilyKind::Diamond => {
                if p != 4 {
                    return Err(Error::InvalidParameter(format!("diamond has p = 4, got {p}")));
                }
                build_diamond(value)
            }
            FamilyKind::Custom => {
                let rows = self.custom_theta.as_ref().expect("validated");
                let model = build_custom(SymMatrix::from_rows(rows)?)?;
                if model.p() != p {
                    return Err(Error::DimensionMismatch { expected: p, found: model.p() });
                }
                Ok(model)
            }
        }
    }
}

/// One model of a sweep.
#[derive(Clone, Debug)]
pub struct Instance {
    /// Star hub degree, 0 for other families.
    pub hub_degree: usize,
    pub strength: f64,
    pub model: ModelSpec<f64>,
}
