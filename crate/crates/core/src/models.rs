//! Ground-truth Gaussian graphical models with exact `(Sigma*, Theta*)` pairs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky, inverse_spd, SymMatrix};
use crate::scalar::Scalar;

/// Entries of a concentration matrix at or below this magnitude are structural zeros.
pub const DEFAULT_ZERO_THRESHOLD: f64 = 1e-8;

/// `DEFAULT_ZERO_THRESHOLD`, raised to `100 * epsilon` for scalars too coarse for it.
pub fn default_zero_threshold<T: Scalar>() -> T {
    T::lit(DEFAULT_ZERO_THRESHOLD).max(T::epsilon() * T::lit(100.0))
}

/// Unordered off-diagonal index pairs, stored as `(min, max)`, 0-based.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EdgeSet(BTreeSet<(usize, usize)>);

impl EdgeSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts `{i, j}`; self-loops are ignored.
    pub fn insert(&mut self, i: usize, j: usize) -> bool {
        if i == j {
            return false;
        }
        self.0.insert((i.min(j), i.max(j)))
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.0.contains(&(i.min(j), i.max(j)))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.iter().copied()
    }

    pub fn is_subset(&self, other: &EdgeSet) -> bool {
        self.0.is_subset(&other.0)
    }
}

impl FromIterator<(usize, usize)> for EdgeSet {
    fn from_iter<I: IntoIterator<Item = (usize, usize)>>(iter: I) -> Self {
        let mut set = EdgeSet::new();
        for (i, j) in iter {
            set.insert(i, j);
        }
        set
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sign {
    Negative,
    Positive,
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Negative => "-",
            Sign::Positive => "+",
        })
    }
}

/// Pairs `(i, j)`, `i < j`, mapped to the sign of the corresponding entry.
pub type SignedEdges = BTreeMap<(usize, usize), Sign>;

/// Off-diagonal entries with `|theta_ij| > zero_threshold`, with their signs.
pub fn signed_edge_set<T: Scalar>(theta: &SymMatrix<T>, zero_threshold: T) -> SignedEdges {
    let p = theta.dim();
    let mut out = SignedEdges::new();
    for i in 0..p {
        for j in i + 1..p {
            let v = theta.get(i, j);
            if v.abs() > zero_threshold {
                out.insert((i, j), if v > T::zero() { Sign::Positive } else { Sign::Negative });
            }
        }
    }
    out
}

/// Which constructor produced a model, with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    Chain { rho: f64 },
    Grid { side: usize, omega: f64 },
    Star { hub_degree: usize, rho: f64 },
    Diamond { rho: f64 },
    Custom,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Chain { .. } => "chain",
            Family::Grid { .. } => "grid",
            Family::Star { .. } => "star",
            Family::Diamond { .. } => "diamond",
            Family::Custom => "custom",
        }
    }
}

/// A ground-truth model with its structural statistics.
#[derive(Clone, Debug)]
pub struct ModelSpec<T> {
    pub family: Family,
    pub sigma_star: SymMatrix<T>,
    pub theta_star: SymMatrix<T>,
    pub edges: EdgeSet,
    /// Maximum number of non-zeros in a row of `Theta*`, diagonal included.
    pub degree_d: usize,
    /// Number of off-diagonal non-zeros of `Theta*` (twice the edge count).
    pub sparsity_s: usize,
    /// Smallest `|Theta*_ij|` over edges; `None` for an empty graph.
    pub theta_min: Option<T>,
    pub zero_threshold: T,
}

impl<T: Scalar> ModelSpec<T> {
    pub fn p(&self) -> usize {
        self.sigma_star.dim()
    }

    pub fn signed_edges(&self) -> SignedEdges {
        signed_edge_set(&self.theta_star, self.zero_threshold)
    }

    pub fn max_variance(&self) -> T {
        self.sigma_star.max_diag()
    }

    /// Assembles a model from a covariance. `Theta* = Sigma*^{-1}` with
    /// sub-threshold off-diagonal entries set to exactly zero.
    fn from_sigma(family: Family, sigma: SymMatrix<T>) -> Result<Self> {
        cholesky(&sigma).map_err(|e| invalid_pd(&family, e))?;
        let thr = default_zero_threshold::<T>();
        let theta = inverse_spd(&sigma)?.map(|i, j, v| if i != j && v.abs() <= thr { T::zero() } else { v });
        Ok(Self::assemble(family, sigma, theta, thr))
    }

    fn from_theta(family: Family, theta: SymMatrix<T>) -> Result<Self> {
        let sigma = inverse_spd(&theta).map_err(|e| invalid_pd(&family, e))?;
        Ok(Self::assemble(family, sigma, theta, default_zero_threshold()))
    }

    fn assemble(family: Family, sigma: SymMatrix<T>, theta: SymMatrix<T>, thr: T) -> Self {
        let p = theta.dim();
        let mut edges = EdgeSet::new();
        let mut degree_d = 0;
        let mut theta_min: Option<T> = None;
        for i in 0..p {
            let mut row_count = 0;
            for j in 0..p {
                let v = theta.get(i, j).abs();
                if i == j || v > thr {
                    row_count += 1;
                }
                if i < j && v > thr {
                    edges.insert(i, j);
                    theta_min = Some(theta_min.map_or(v, |m| m.min(v)));
                }
            }
            degree_d = degree_d.max(row_count);
        }
        let sparsity_s = 2 * edges.len();
        Self {
            family,
            sigma_star: sigma,
            theta_star: theta,
            edges,
            degree_d,
            sparsity_s,
            theta_min,
            zero_threshold: thr,
        }
    }

    pub fn to_document(&self) -> ModelDocument {
        ModelDocument {
            p: self.p(),
            family: self.family.name().to_string(),
            params: self.family.clone(),
            edges: self.edges.iter().map(|(i, j)| [i + 1, j + 1]).collect(),
            theta_min: self.theta_min.map(Scalar::as_f64),
            d: self.degree_d,
            s: self.sparsity_s,
            theta_star: matches!(self.family, Family::Custom).then(|| {
                self.theta_star.to_rows().into_iter().map(|r| r.into_iter().map(Scalar::as_f64).collect()).collect()
            }),
        }
    }

    /// Rebuilds a model from its JSON document: named families are
    /// reconstructed from their parameters, custom ones from `theta_star`.
    pub fn from_document(doc: &ModelDocument) -> Result<Self> {
        let model = match &doc.params {
            Family::Chain { rho } => build_chain(doc.p, T::lit(*rho))?,
            Family::Grid { side, omega } => build_grid(*side, T::lit(*omega))?,
            Family::Star { hub_degree, rho } => build_star(doc.p, *hub_degree, T::lit(*rho))?,
            Family::Diamond { rho } => build_diamond(T::lit(*rho))?,
            Family::Custom => {
                let rows = doc
                    .theta_star
                    .as_ref()
                    .ok_or_else(|| Error::InvalidParameter("custom model document lacks theta_star".into()))?;
                let rows: Vec<Vec<T>> = rows.iter().map(|r| r.iter().map(|&v| T::lit(v)).collect()).collect();
                build_custom(SymMatrix::from_rows(&rows)?)?
            }
        };
        if model.p() != doc.p {
            return Err(Error::DimensionMismatch { expected: doc.p, found: model.p() });
        }
        Ok(model)
    }
}

fn invalid_pd(family: &Family, e: Error) -> Error {
    match e {
        Error::NotPositiveDefinite { .. } => {
            Error::InvalidParameter(format!("{family:?} does not give a positive definite matrix"))
        }
        other => other,
    }
}

/// JSON form of a model. Edge labels are 1-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub p: usize,
    pub family: String,
    pub params: Family,
    pub edges: Vec<[usize; 2]>,
    pub theta_min: Option<f64>,
    pub d: usize,
    pub s: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_star: Option<Vec<Vec<f64>>>,
}

/// Chain (path) graph with `Sigma*_ij = rho^|i-j|`; `Theta*` is tridiagonal.
pub fn build_chain<T: Scalar>(p: usize, rho: T) -> Result<ModelSpec<T>> {
    if p < 2 {
        return Err(Error::InvalidParameter(format!("chain needs p >= 2, got {p}")));
    }
    if !(rho.abs() < T::one()) {
        return Err(Error::InvalidParameter(format!("chain needs |rho| < 1, got {rho}")));
    }
    let sigma = SymMatrix::from_upper_fn(p, |i, j| rho.powi((j - i) as i32));
    ModelSpec::from_sigma(Family::Chain { rho: rho.as_f64() }, sigma)
}

/// Star with hub 0 and spokes `1..=hub_degree`; remaining nodes are isolated.
/// `Sigma*_{0j} = rho` for spokes, `rho^2` between spokes, unit diagonal.
pub fn build_star<T: Scalar>(p: usize, hub_degree: usize, rho: T) -> Result<ModelSpec<T>> {
    if hub_degree < 1 || hub_degree + 1 > p {
        return Err(Error::InvalidParameter(format!(
            "star needs 1 <= hub degree <= p-1, got {hub_degree} with p = {p}"
        )));
    }
    let in_star = |i: usize| i <= hub_degree;
    let sigma = SymMatrix::from_upper_fn(p, |i, j| {
        if i == j {
            T::one()
        } else if !in_star(i) || !in_star(j) {
            T::zero()
        } else if i == 0 {
            rho
        } else {
            rho * rho
        }
    });
    ModelSpec::from_sigma(Family::Star { hub_degree, rho: rho.as_f64() }, sigma)
}

/// 4-nearest-neighbour lattice on `side x side` nodes (row-major numbering),
/// `Theta*_ii = 1` and `Theta*_ij = omega` on lattice edges.
pub fn build_grid<T: Scalar>(side: usize, omega: T) -> Result<ModelSpec<T>> {
    if side < 2 {
        return Err(Error::InvalidParameter(format!("grid needs side >= 2, got {side}")));
    }
    let p = side * side;
    let adjacent = |a: usize, b: usize| {
        let (ra, ca) = (a / side, a % side);
        let (rb, cb) = (b / side, b % side);
        (ra == rb && ca.abs_diff(cb) == 1) || (ca == cb && ra.abs_diff(rb) == 1)
    };
    let theta = SymMatrix::from_upper_fn(p, |i, j| {
        if i == j {
            T::one()
        } else if adjacent(i, j) {
            omega
        } else {
            T::zero()
        }
    });
    ModelSpec::from_theta(Family::Grid { side, omega: omega.as_f64() }, theta)
}

/// Four-node diamond: every pair is an edge except (0,3). Unit diagonal,
/// `rho` on edges except `Sigma*_12 = 0`, and `Sigma*_03 = 2 rho^2`.
pub fn build_diamond<T: Scalar>(rho: T) -> Result<ModelSpec<T>> {
    if rho.abs() > T::lit(std::f64::consts::FRAC_1_SQRT_2) {
        return Err(Error::InvalidParameter(format!("diamond needs |rho| <= 1/sqrt(2), got {rho}")));
    }
    let sigma = SymMatrix::from_upper_fn(4, |i, j| match (i, j) {
        _ if i == j => T::one(),
        (1, 2) => T::zero(),
        (0, 3) => T::lit(2.0) * rho * rho,
        _ => rho,
    });
    ModelSpec::from_sigma(Family::Diamond { rho: rho.as_f64() }, sigma)
}

pub fn build_custom<T: Scalar>(theta_star: SymMatrix<T>) -> Result<ModelSpec<T>> {
    let sigma = inverse_spd(&theta_star)?;
    Ok(ModelSpec::assemble(Family::Custom, sigma, theta_star, default_zero_threshold()))
}
