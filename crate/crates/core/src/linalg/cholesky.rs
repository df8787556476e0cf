use crate::error::{Error, Result};
use crate::linalg::matrix::{DenseMatrix, SymMatrix};
use crate::scalar::Scalar;

/// Dot product with four partial sums.
#[inline]
pub(crate) fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    let mut acc = [T::zero(); 4];
    let (xc, yc) = (x.chunks_exact(4), y.chunks_exact(4));
    let (xr, yr) = (xc.remainder(), yc.remainder());
    for (a, b) in xc.zip(yc) {
        acc[0] += a[0] * b[0];
        acc[1] += a[1] * b[1];
        acc[2] += a[2] * b[2];
        acc[3] += a[3] * b[3];
    }
    let mut tail = T::zero();
    for (&a, &b) in xr.iter().zip(yr) {
        tail += a * b;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Lower-triangular factor `L` with `L L^T = A` and strictly positive diagonal.
#[derive(Clone, Debug)]
pub struct Cholesky<T> {
    dim: usize,
    lower: Vec<T>,
}

impl<T: Scalar> Cholesky<T> {
    /// Row-oriented Cholesky–Banachiewicz factorization. Fails with
    /// `NotPositiveDefinite` on the first pivot that is not strictly positive.
    pub fn factor(a: &SymMatrix<T>) -> Result<Self> {
        let n = a.dim();
        let mut l = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..=i {
                let (head, row_i) = l.split_at(i * n);
                let row_j = if j == i { &row_i[..j] } else { &head[j * n..j * n + j] };
                let sum = a.get(i, j) - dot(&row_i[..j], row_j);
                if i == j {
                    if !(sum > T::zero()) || !sum.is_finite() {
                        return Err(Error::NotPositiveDefinite { index: i, pivot: sum.as_f64() });
                    }
                    l[i * n + i] = sum.sqrt();
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        Ok(Self { dim: n, lower: l })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn l(&self, i: usize, j: usize) -> T {
        self.lower[i * self.dim + j]
    }

    /// The factor as a dense matrix (zeros above the diagonal).
    pub fn lower(&self) -> DenseMatrix<T> {
        DenseMatrix::from_fn(self.dim, self.dim, |i, j| self.l(i, j))
    }

    /// `log det A = 2 * sum(log L_ii)`.
    pub fn log_det(&self) -> T {
        let two = T::lit(2.0);
        (0..self.dim).map(|i| self.l(i, i).ln()).sum::<T>() * two
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [T]) {
        let n = self.dim;
        assert_eq!(b.len(), n);
        for i in 0..n {
            let s = b[i] - dot(&self.lower[i * n..i * n + i], &b[..i]);
            b[i] = s / self.l(i, i);
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for (k, &bk) in b.iter().enumerate().skip(i + 1) {
                s -= self.l(k, i) * bk;
            }
            b[i] = s / self.l(i, i);
        }
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// `A^{-1}` via `L^{-1}`: `A^{-1} = L^{-T} L^{-1}`. Only the upper triangle
    /// is computed, so the result is exactly symmetric.
    pub fn inverse(&self) -> SymMatrix<T> {
        let n = self.dim;
        // Column-major-ish storage of M = L^{-1} (lower triangular).
        let mut m = vec![T::zero(); n * n];
        for j in 0..n {
            m[j * n + j] = T::one() / self.l(j, j);
            for i in j + 1..n {
                let mut s = T::zero();
                for k in j..i {
                    s += self.l(i, k) * m[k * n + j];
                }
                m[i * n + j] = -s / self.l(i, i);
            }
        }
        SymMatrix::from_upper_fn(n, |i, j| {
            // (M^T M)_{ij} = sum_{k >= max(i,j)} M_{ki} M_{kj}
            let start = i.max(j);
            (start..n).map(|k| m[k * n + i] * m[k * n + j]).sum()
        })
    }

    /// `L L^T`, for reconstruction checks.
    pub fn reconstruct(&self) -> SymMatrix<T> {
        SymMatrix::from_upper_fn(self.dim, |i, j| (0..=i.min(j)).map(|k| self.l(i, k) * self.l(j, k)).sum())
    }

    /// `L z` for a vector `z`; used to color standard normal draws.
    pub fn mul_lower(&self, z: &[T]) -> Vec<T> {
        (0..self.dim).map(|i| (0..=i).map(|k| self.l(i, k) * z[k]).sum()).collect()
    }
}

pub fn cholesky<T: Scalar>(a: &SymMatrix<T>) -> Result<Cholesky<T>> {
    Cholesky::factor(a)
}

pub fn log_det<T: Scalar>(a: &SymMatrix<T>) -> Result<T> {
    Ok(Cholesky::factor(a)?.log_det())
}

pub fn inverse_spd<T: Scalar>(a: &SymMatrix<T>) -> Result<SymMatrix<T>> {
    Ok(Cholesky::factor(a)?.inverse())
}

pub fn is_positive_definite<T: Scalar>(a: &SymMatrix<T>) -> bool {
    Cholesky::factor(a).is_ok()
}
