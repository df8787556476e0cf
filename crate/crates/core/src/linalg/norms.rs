//! The four matrix norms used throughout: elementwise max, induced `l_inf`
//! operator norm, Frobenius, and spectral.

use crate::error::{Error, Result};
use crate::linalg::matrix::SymMatrix;
use crate::scalar::Scalar;

/// Above this dimension the spectral norm falls back to power iteration.
pub const JACOBI_MAX_DIM: usize = 512;

const JACOBI_MAX_SWEEPS: usize = 100;
const POWER_MAX_ITERS: usize = 100_000;

/// `max_ij |a_ij|`.
pub fn norm_elem_max<T: Scalar>(a: &SymMatrix<T>) -> T {
    a.as_slice().iter().map(|v| v.abs()).fold(T::zero(), T::max)
}

/// `max_j sum_k |a_jk|`. Equals the `l_1` operator norm since `a` is symmetric.
pub fn norm_linf_op<T: Scalar>(a: &SymMatrix<T>) -> T {
    (0..a.dim()).map(|i| a.row(i).iter().map(|v| v.abs()).sum::<T>()).fold(T::zero(), T::max)
}

pub fn norm_frobenius<T: Scalar>(a: &SymMatrix<T>) -> T {
    a.as_slice().iter().map(|&v| v * v).sum::<T>().sqrt()
}

/// Largest absolute eigenvalue.
pub fn norm_spectral<T: Scalar>(a: &SymMatrix<T>) -> Result<T> {
    if a.dim() <= JACOBI_MAX_DIM {
        let eig = symmetric_eigenvalues(a)?;
        Ok(eig.iter().map(|v| v.abs()).fold(T::zero(), T::max))
    } else {
        power_spectral(a)
    }
}

/// Eigenvalues (ascending) by the cyclic Jacobi method.
pub fn symmetric_eigenvalues<T: Scalar>(a: &SymMatrix<T>) -> Result<Vec<T>> {
    let n = a.dim();
    let mut m = a.as_slice().to_vec();
    let eps = T::epsilon();
    let scale = norm_frobenius(a);
    if scale == T::zero() {
        return Ok(vec![T::zero(); n]);
    }
    let target = eps * scale * T::from_usize_lossy(n);

    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j] * m[i * n + j])
            .sum::<T>()
            .sqrt();
        if off <= target {
            let mut ev: Vec<T> = (0..n).map(|i| m[i * n + i]).collect();
            ev.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
            return Ok(ev);
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                // Below round-off relative to both pivots: drop instead of rotating.
                if apq.abs() <= eps * T::lit(0.5) * app.abs().min(aqq.abs()) {
                    m[p * n + q] = T::zero();
                    m[q * n + p] = T::zero();
                    continue;
                }
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    Err(Error::NotConverged { what: "Jacobi eigensolver", iterations: JACOBI_MAX_SWEEPS })
}

/// `sqrt(lambda_max(A^2))` by power iteration from a fixed start vector.
fn power_spectral<T: Scalar>(a: &SymMatrix<T>) -> Result<T> {
    let n = a.dim();
    let mut x: Vec<T> = (0..n).map(|i| T::one() + T::lit(1e-3) * T::from_usize_lossy(i % 7)).collect();
    normalize(&mut x);
    let mut prev = T::zero();
    let tol = T::lit(1e-9);
    for _ in 0..POWER_MAX_ITERS {
        let y = a.mul_vec(&a.mul_vec(&x));
        let rq: T = x.iter().zip(&y).map(|(&u, &v)| u * v).sum();
        x = y;
        if normalize(&mut x) == T::zero() {
            return Ok(T::zero());
        }
        if (rq - prev).abs() <= tol * rq.abs() {
            return Ok(rq.abs().sqrt());
        }
        prev = rq;
    }
    Err(Error::NotConverged { what: "power iteration", iterations: POWER_MAX_ITERS })
}

fn normalize<T: Scalar>(x: &mut [T]) -> T {
    let norm = x.iter().map(|&v| v * v).sum::<T>().sqrt();
    if norm > T::zero() {
        x.iter_mut().for_each(|v| *v /= norm);
    }
    norm
}
