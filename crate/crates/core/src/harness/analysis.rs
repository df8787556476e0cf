//! Post-processing of result tables: success curves, 50% crossings,
//! log-log slopes.

use std::collections::BTreeMap;

use crate::harness::table::{mean, Aggregate, GroupKey, ResultTable};

/// Weighted least-squares non-decreasing fit (pool adjacent violators).
pub fn isotonic_fit(values: &[f64], weights: &[f64]) -> Vec<f64> {
    assert_eq!(values.len(), weights.len());
    // Blocks of (mean, weight, count).
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        blocks.push((v, w, 1));
        while blocks.len() > 1 && blocks[blocks.len() - 2].0 > blocks[blocks.len() - 1].0 {
            let (v2, w2, c2) = blocks.pop().unwrap();
            let (v1, w1, c1) = blocks.pop().unwrap();
            let w = w1 + w2;
            blocks.push(((v1 * w1 + v2 * w2) / w, w, c1 + c2));
        }
    }
    blocks.into_iter().flat_map(|(v, _, c)| std::iter::repeat_n(v, c)).collect()
}

/// Aggregates grouped per model, each list ordered by `n`.
pub fn curves(table: &ResultTable) -> BTreeMap<GroupKey, Vec<Aggregate>> {
    let mut out: BTreeMap<GroupKey, Vec<Aggregate>> = BTreeMap::new();
    for a in table.aggregates() {
        out.entry(a.group()).or_default().push(a);
    }
    out
}

/// Sample size at which the (isotonic) success curve first reaches 1/2,
/// linearly interpolated between the bracketing grid points. `None` when
/// the curve never reaches 1/2 or already starts at or above it.
pub fn n50(curve: &[Aggregate]) -> Option<f64> {
    let rates: Vec<f64> = curve.iter().map(|a| a.success_rate).collect();
    let weights: Vec<f64> = curve.iter().map(|a| a.trials as f64).collect();
    let fit = isotonic_fit(&rates, &weights);
    let ns: Vec<f64> = curve.iter().map(|a| a.n as f64).collect();
    crossing(&ns, &fit, 0.5)
}

pub fn crossing(xs: &[f64], ys: &[f64], level: f64) -> Option<f64> {
    let i = ys.iter().position(|&y| y >= level)?;
    if i == 0 {
        return None;
    }
    let (x0, x1, y0, y1) = (xs[i - 1], xs[i], ys[i - 1], ys[i]);
    Some(x0 + (level - y0) / (y1 - y0) * (x1 - x0))
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (mx, my) = (mean(&lx), mean(&ly));
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

/// Sample standard deviation over mean.
pub fn coefficient_of_variation(v: &[f64]) -> f64 {
    let m = mean(v);
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0);
    var.sqrt() / m
}

/// `(max - min) / mean`.
pub fn relative_spread(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    (max - min) / mean(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isotonic_pools_violators() {
        let fit = isotonic_fit(&[0.0, 0.4, 0.2, 0.9, 1.0], &[1.0; 5]);
        assert_eq!(fit, vec![0.0, 0.30000000000000004, 0.30000000000000004, 0.9, 1.0]);
        assert_eq!(isotonic_fit(&[1.0, 0.0], &[3.0, 1.0]), vec![0.75, 0.75]);
    }

    #[test]
    fn crossing_interpolates() {
        assert_eq!(crossing(&[10.0, 20.0, 30.0], &[0.0, 0.25, 0.75], 0.5), Some(25.0));
        assert_eq!(crossing(&[10.0, 20.0], &[0.6, 1.0], 0.5), None);
        assert_eq!(crossing(&[10.0, 20.0], &[0.0, 0.1], 0.5), None);
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [100.0, 200.0, 400.0, 800.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-0.5)).collect();
        assert!((loglog_slope(&xs, &ys) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn spread_measures() {
        assert!((relative_spread(&[1.0, 2.0, 3.0]) - 1.0).abs() < 1e-15);
        assert!((coefficient_of_variation(&[1.0, 2.0, 3.0]) - 0.5).abs() < 1e-15);
    }
}
