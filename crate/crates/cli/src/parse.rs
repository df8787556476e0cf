//! Value parsers for command-line lists, grids and model options.

use anyhow::{anyhow, bail, Context, Result};
use sparse_precision::harness::{HubDegrees, Strength};
use sparse_precision::theory::TailModel;

/// `a,b,c`.
pub fn list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    s.split(',').map(|v| v.trim().parse::<T>().with_context(|| format!("bad list entry `{v}` in `{s}`"))).collect()
}

/// `a,b,c`, `start:stop:step` (arithmetic) or `start:stop:*k` (geometric),
/// both inclusive of `stop` when it is hit exactly.
pub fn n_grid(s: &str) -> Result<Vec<usize>> {
    let parts: Vec<&str> = s.split(':').collect();
    let grid = match parts.as_slice() {
        [_] => list(s)?,
        [start, stop, step] => {
            let start: usize = start.trim().parse().with_context(|| format!("bad start in `{s}`"))?;
            let stop: usize = stop.trim().parse().with_context(|| format!("bad stop in `{s}`"))?;
            let mut out = Vec::new();
            if let Some(factor) = step.trim().strip_prefix('*') {
                let k: usize = factor.parse().with_context(|| format!("bad factor in `{s}`"))?;
                if k < 2 || start == 0 {
                    bail!("geometric grid `{s}` needs start >= 1 and factor >= 2");
                }
                let mut n = start;
                while n <= stop {
                    out.push(n);
                    n *= k;
                }
            } else {
                let step: usize = step.trim().parse().with_context(|| format!("bad step in `{s}`"))?;
                if step == 0 {
                    bail!("grid `{s}` has a zero step");
                }
                out.extend((start..=stop).step_by(step));
            }
            out
        }
        _ => bail!("expected a list or start:stop:step, got `{s}`"),
    };
    if grid.is_empty() {
        bail!("grid `{s}` is empty");
    }
    Ok(grid)
}

/// A number, or `c/d` for `c` divided by the star hub degree.
pub fn strength(s: &str) -> Result<Strength> {
    match s.trim().strip_suffix("/d") {
        Some(c) => Ok(Strength::OverHubDegree(c.parse().with_context(|| format!("bad strength `{s}`"))?)),
        None => Ok(Strength::Fixed(s.trim().parse().with_context(|| format!("bad strength `{s}`"))?)),
    }
}

pub fn strengths(s: &str) -> Result<Vec<Strength>> {
    s.split(',').map(strength).collect()
}

/// A degree list `4,8,16` or `frac:<f>` for `ceil(f * p)`.
pub fn hub_degrees(s: &str) -> Result<HubDegrees> {
    match s.trim().strip_prefix("frac:") {
        Some(f) => Ok(HubDegrees::FractionOfP(f.parse().with_context(|| format!("bad fraction `{s}`"))?)),
        None => Ok(HubDegrees::List(list(s)?)),
    }
}

/// `gaussian`, `subgaussian:<sigma>` or `polynomial:<m>:<K_m>`.
pub fn tail(s: &str, max_var: f64) -> Result<TailModel<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |v: &str| v.parse::<f64>().with_context(|| format!("bad number in tail `{s}`"));
    let tail = match parts.as_slice() {
        ["gaussian"] => TailModel::gaussian(max_var),
        ["subgaussian"] => TailModel::subgaussian(1.0, max_var)?,
        ["subgaussian", sigma] => TailModel::subgaussian(num(sigma)?, max_var)?,
        ["polynomial", m, k] => {
            TailModel::polynomial(m.parse().with_context(|| format!("bad moment in `{s}`"))?, num(k)?, max_var)?
        }
        _ => return Err(anyhow!("unknown tail `{s}`; use gaussian, subgaussian:<sigma> or polynomial:<m>:<K>")),
    };
    Ok(tail)
}
