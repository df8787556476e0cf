//! Gaussian sampling, sample covariance and empirical tail checks.

use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky, io, DenseMatrix, SymMatrix};
use crate::models::ModelSpec;
use crate::scalar::Scalar;
use crate::theory::TailModel;

/// Root seed plus a path of stream labels. Each distinct path yields an
/// independent, reproducible random stream.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub root: u64,
    #[serde(default)]
    pub labels: Vec<u64>,
}

impl Seed {
    pub fn new(root: u64) -> Self {
        Self { root, labels: Vec::new() }
    }

    pub fn child(&self, label: u64) -> Self {
        let mut labels = self.labels.clone();
        labels.push(label);
        Self { root: self.root, labels }
    }

    /// Child stream labelled by a string (hashed with FNV-1a, stable across platforms).
    pub fn named(&self, name: &str) -> Self {
        self.child(fnv1a(name.as_bytes()))
    }

    /// 64-bit key obtained by folding the labels into the root with splitmix64.
    pub fn key(&self) -> u64 {
        self.labels.iter().fold(splitmix64(self.root), |acc, &l| splitmix64(acc ^ splitmix64(l)))
    }

    pub fn rng(&self) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(self.key())
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

/// `n` observations of a `p`-vector, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<T> {
    n: usize,
    p: usize,
    rows: Vec<T>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(n: usize, p: usize, rows: Vec<T>) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::InvalidParameter("dataset needs n >= 1 and p >= 1".into()));
        }
        if rows.len() != n * p {
            return Err(Error::DimensionMismatch { expected: n * p, found: rows.len() });
        }
        if let Some(k) = rows.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { i: k / p, j: k % p });
        }
        Ok(Self { n, p, rows })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn row(&self, k: usize) -> &[T] {
        &self.rows[k * self.p..(k + 1) * self.p]
    }

    /// Stacks the rows of `other` below `self`.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if self.p != other.p {
            return Err(Error::DimensionMismatch { expected: self.p, found: other.p });
        }
        let mut rows = self.rows.clone();
        rows.extend_from_slice(&other.rows);
        Ok(Self { n: self.n + other.n, p: self.p, rows })
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let m = io::read_dense_csv::<T, _>(reader)?;
        Self::new(m.rows(), m.cols(), m.as_slice().to_vec())
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        io::write_dense_csv(writer, &DenseMatrix::new(self.n, self.p, self.rows.clone())?, None)
    }
}

/// `n` i.i.d. draws `L z` with `L L^T = Sigma*` and `z` standard normal.
pub fn sample_gaussian<T: Scalar>(model: &ModelSpec<T>, n: usize, seed: &Seed) -> Result<Dataset<T>> {
    sample_from_covariance(&model.sigma_star, n, seed)
}

pub fn sample_from_covariance<T: Scalar>(sigma: &SymMatrix<T>, n: usize, seed: &Seed) -> Result<Dataset<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample size must be at least 1".into()));
    }
    let chol = cholesky(sigma)?;
    let p = sigma.dim();
    let mut rng = seed.rng();
    let mut rows = Vec::with_capacity(n * p);
    let mut z = vec![T::zero(); p];
    for _ in 0..n {
        for v in z.iter_mut() {
            let draw: f64 = StandardNormal.sample(&mut rng);
            *v = T::lit(draw);
        }
        rows.extend(chol.mul_lower(&z));
    }
    Dataset::new(n, p, rows)
}

/// `(1/n) sum_k x_k x_k^T`, without mean subtraction.
pub fn sample_covariance<T: Scalar>(data: &Dataset<T>) -> SymMatrix<T> {
    covariance_about(data, None)
}

/// Sample covariance about the empirical mean (divisor `n`). For data that
/// is not known to be zero-mean.
pub fn sample_covariance_centered<T: Scalar>(data: &Dataset<T>) -> SymMatrix<T> {
    let n = T::from_usize_lossy(data.n);
    let mean: Vec<T> = (0..data.p).map(|j| (0..data.n).map(|k| data.row(k)[j]).sum::<T>() / n).collect();
    covariance_about(data, Some(&mean))
}

fn covariance_about<T: Scalar>(data: &Dataset<T>, mean: Option<&[T]>) -> SymMatrix<T> {
    let p = data.p;
    let mut acc = vec![T::zero(); p * p];
    let mut x = vec![T::zero(); p];
    for k in 0..data.n {
        x.copy_from_slice(data.row(k));
        if let Some(m) = mean {
            x.iter_mut().zip(m).for_each(|(v, &mu)| *v -= mu);
        }
        for i in 0..p {
            let xi = x[i];
            for j in i..p {
                acc[i * p + j] += xi * x[j];
            }
        }
    }
    let n = T::from_usize_lossy(data.n);
    SymMatrix::from_upper_fn(p, |i, j| acc[i * p + j] / n)
}

/// Effective noise `W = Sigma_hat - Sigma*`.
pub fn noise_matrix<T: Scalar>(sigma_hat: &SymMatrix<T>, model: &ModelSpec<T>) -> Result<SymMatrix<T>> {
    sigma_hat.sub(&model.sigma_star)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailCheckRow {
    pub delta: f64,
    pub emp_rate: f64,
    pub bound: f64,
}

/// For each `delta`, the largest (over entries `(i,j)`) empirical frequency
/// of `|Sigma_hat_ij - Sigma*_ij| > delta` across `trials` independent
/// samples of size `n`, next to the sub-Gaussian tail bound with `sigma = 1`.
pub fn empirical_tail_check<T: Scalar>(
    model: &ModelSpec<T>,
    n: usize,
    delta_grid: &[T],
    trials: usize,
    seed: &Seed,
) -> Result<Vec<TailCheckRow>> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let tail = TailModel::gaussian(model.max_variance());
    let ceiling = tail.delta_ceiling();
    for &d in delta_grid {
        if !(d > T::zero() && d < ceiling) {
            return Err(Error::InvalidParameter(format!("delta = {d} outside (0, {ceiling})")));
        }
    }
    let p = model.p();
    let pairs: Vec<(usize, usize)> = (0..p).flat_map(|i| (i..p).map(move |j| (i, j))).collect();
    let deviations: Vec<Vec<T>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let data = sample_gaussian(model, n, &seed.child(t as u64))?;
            let s = sample_covariance(&data);
            Ok(pairs.iter().map(|&(i, j)| (s.get(i, j) - model.sigma_star.get(i, j)).abs()).collect())
        })
        .collect::<Result<_>>()?;

    Ok(delta_grid
        .iter()
        .map(|&delta| {
            let worst =
                (0..pairs.len()).map(|k| deviations.iter().filter(|dev| dev[k] > delta).count()).max().unwrap_or(0);
            TailCheckRow {
                delta: delta.as_f64(),
                emp_rate: worst as f64 / trials as f64,
                bound: tail.tail_probability(n, delta).as_f64(),
            }
        })
        .collect())
}

pub fn write_tail_check_csv<W: Write>(writer: W, rows: &[TailCheckRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["delta", "emp_rate", "bound"])?;
    for r in rows {
        w.write_record([format!("{:.16e}", r.delta), format!("{:.16e}", r.emp_rate), format!("{:.16e}", r.bound)])?;
    }
    w.flush()?;
    Ok(())
}
