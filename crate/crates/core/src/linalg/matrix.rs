use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense symmetric `p x p` matrix stored as a full row-major array.
///
/// Symmetry is exact: every constructor either verifies `a[i][j] == a[j][i]`
/// bit-for-bit or builds the matrix from its upper triangle. Entries are
/// always finite.
#[derive(Clone, PartialEq)]
pub struct SymMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> SymMatrix<T> {
    /// Validating constructor from a row-major buffer. Rejects asymmetric or
    /// non-finite input.
    pub fn new(dim: usize, data: Vec<T>) -> Result<Self> {
        check_shape(dim, &data)?;
        for i in 0..dim {
            for j in 0..dim {
                let v = data[i * dim + j];
                if !v.is_finite() {
                    return Err(Error::NonFinite { i, j });
                }
                if j > i && v != data[j * dim + i] {
                    return Err(Error::NotSymmetric { i, j });
                }
            }
        }
        Ok(Self { dim, data })
    }

    /// Builds `(a + a^T) / 2` from a square row-major buffer. Intended for
    /// matrices read from text files, where round-off breaks exact symmetry.
    pub fn symmetrize(dim: usize, data: &[T]) -> Result<Self> {
        check_shape(dim, data)?;
        let half = T::lit(0.5);
        let mut out = vec![T::zero(); dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let (a, b) = (data[i * dim + j], data[j * dim + i]);
                if !a.is_finite() {
                    return Err(Error::NonFinite { i, j });
                }
                if !b.is_finite() {
                    return Err(Error::NonFinite { i: j, j: i });
                }
                let v = if i == j { a } else { (a + b) * half };
                out[i * dim + j] = v;
                out[j * dim + i] = v;
            }
        }
        Ok(Self { dim, data: out })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
            }
            data.extend_from_slice(row);
        }
        Self::new(dim, data)
    }

    /// Builds a matrix from a function evaluated on the upper triangle
    /// (`i <= j`) and mirrored. Panics if `f` returns a non-finite value.
    pub fn from_upper_fn(dim: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = vec![T::zero(); dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                assert!(v.is_finite(), "non-finite entry at ({i},{j})");
                data[i * dim + j] = v;
                data[j * dim + i] = v;
            }
        }
        Self { dim, data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![T::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diag(&vec![T::one(); dim])
    }

    pub fn from_diag(diag: &[T]) -> Self {
        let dim = diag.len();
        Self::from_upper_fn(dim, |i, j| if i == j { diag[i] } else { T::zero() })
    }

    /// Symmetric part of an arbitrary square matrix, checked for finiteness.
    pub fn from_dense_symmetrized(m: &DenseMatrix<T>) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::DimensionMismatch { expected: m.rows(), found: m.cols() });
        }
        Self::symmetrize(m.rows(), m.as_slice())
    }

    /// Takes ownership of a buffer that the caller guarantees to be exactly
    /// symmetric and finite.
    pub(crate) fn from_raw(dim: usize, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), dim * dim);
        debug_assert!((0..dim).all(|i| (i..dim).all(|j| data[i * dim + j] == data[j * dim + i])));
        Self { dim, data }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn diag(&self) -> Vec<T> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn max_diag(&self) -> T {
        self.diag().into_iter().fold(T::neg_infinity(), T::max)
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.dim).map(|i| self.row(i).to_vec()).collect()
    }

    /// Entrywise map; the result is symmetric because `f` sees each
    /// unordered pair once.
    pub fn map(&self, mut f: impl FnMut(usize, usize, T) -> T) -> Self {
        Self::from_upper_fn(self.dim, |i, j| f(i, j, self.get(i, j)))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self::from_raw(self.dim, self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self::from_raw(self.dim, self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect()))
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_raw(self.dim, self.data.iter().map(|&a| a * s).collect())
    }

    /// General product `self * other`; not symmetric in general.
    pub fn matmul(&self, other: &Self) -> Result<DenseMatrix<T>> {
        self.check_same_dim(other)?;
        Ok(DenseMatrix::from_sym(self).matmul(&DenseMatrix::from_sym(other)))
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.dim);
        (0..self.dim).map(|i| self.row(i).iter().zip(x).map(|(&a, &b)| a * b).sum()).collect()
    }

    /// `trace(self * other)` for symmetric arguments, i.e. the entrywise inner product.
    pub fn trace_product(&self, other: &Self) -> Result<T> {
        self.check_same_dim(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(&a, &b)| a * b).sum())
    }

    /// Sum of absolute off-diagonal entries, counting both `(i,j)` and `(j,i)`.
    pub fn offdiag_l1(&self) -> T {
        let mut acc = T::zero();
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i != j {
                    acc += self.get(i, j).abs();
                }
            }
        }
        acc
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| i == j || self.get(i, j) == T::zero()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        self.check_same_dim(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(&a, &b)| (a - b).abs()).fold(T::zero(), T::max))
    }

    pub fn cast<U: Scalar>(&self) -> SymMatrix<U> {
        SymMatrix { dim: self.dim, data: self.data.iter().map(|&v| U::lit(v.as_f64())).collect() }
    }

    pub(crate) fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(())
    }
}

fn check_shape<T>(dim: usize, data: &[T]) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidParameter("matrix dimension must be positive".into()));
    }
    if data.len() != dim * dim {
        return Err(Error::DimensionMismatch { expected: dim * dim, found: data.len() });
    }
    Ok(())
}

impl<T: fmt::Debug> fmt::Debug for SymMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SymMatrix {}x{} [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for v in &self.data[i * self.dim..(i + 1) * self.dim] {
                write!(f, "{:>12.6?} ", v)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// General rectangular row-major matrix. Used for products of symmetric
/// matrices and for the rectangular Hessian blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: data.len() });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_sym(m: &SymMatrix<T>) -> Self {
        Self { rows: m.dim(), cols: m.dim(), data: m.as_slice().to_vec() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == T::zero() {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Induced `l_inf` operator norm: maximum absolute row sum.
    pub fn linf_op_norm(&self) -> T {
        (0..self.rows).map(|i| self.row(i).iter().map(|v| v.abs()).sum::<T>()).fold(T::zero(), T::max)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().map(|v| v.abs()).fold(T::zero(), T::max)
    }

    /// Maximum absolute deviation from the identity; square matrices only.
    pub fn max_abs_diff_identity(&self) -> T {
        assert_eq!(self.rows, self.cols);
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let target = if i == j { T::one() } else { T::zero() };
                worst = worst.max((self.get(i, j) - target).abs());
            }
        }
        worst
    }
}
