//! Cyclic coordinate descent for the column subproblem
//!
//! ```text
//! minimize 0.5 * scale * b' A b + c' b + lambda * ||b||_1
//! ```
//!
//! over the `free` coordinates (others stay at zero). `u = A b` is kept in
//! sync with `b` so each coordinate step is O(m).

use crate::linalg::{cholesky, SymMatrix};
use crate::scalar::{soft_threshold, Scalar};

pub(super) struct Problem<'a, T> {
    /// `m x m` row-major, positive definite.
    pub a: &'a [T],
    pub m: usize,
    pub scale: T,
    pub linear: &'a [T],
    pub lambda: T,
    pub free: &'a [usize],
}

pub(super) fn mat_vec<T: Scalar>(a: &[T], m: usize, b: &[T]) -> Vec<T> {
    let mut u = vec![T::zero(); m];
    for (k, &bk) in b.iter().enumerate() {
        if bk != T::zero() {
            for (ui, &aik) in u.iter_mut().zip(&a[k * m..(k + 1) * m]) {
                *ui += aik * bk;
            }
        }
    }
    u
}

impl<T: Scalar> Problem<'_, T> {
    /// One coordinate step on `k`; returns the change weighted by the
    /// curvature, which bounds the step's effect on the gradient.
    fn step(&self, k: usize, b: &mut [T], u: &mut [T]) -> T {
        let m = self.m;
        let akk = self.a[k * m + k];
        let h = self.scale * akk;
        let partial = self.scale * (u[k] - akk * b[k]) + self.linear[k];
        let next = soft_threshold(-partial, self.lambda) / h;
        let delta = next - b[k];
        if delta == T::zero() {
            return T::zero();
        }
        b[k] = next;
        // A is symmetric, so row k doubles as column k.
        for (ui, &aik) in u.iter_mut().zip(&self.a[k * m..(k + 1) * m]) {
            *ui += aik * delta;
        }
        delta.abs() * h
    }

    /// Rounding noise in a partial gradient `scale * (A b)_k + c_k`.
    fn noise_floor(&self, b: &[T]) -> T {
        let m = self.m;
        let mut worst = T::zero();
        for &k in self.free {
            let row: T = self.a[k * m..(k + 1) * m].iter().zip(b).map(|(&a, &x)| (a * x).abs()).sum();
            worst = worst.max(self.scale * row + self.linear[k].abs());
        }
        T::lit(16.0) * T::from_usize_lossy(m.max(1)).sqrt() * T::epsilon() * worst
    }

    /// Moves toward the minimizer over `active` with their signs frozen,
    /// `scale * A_aa b_a = -(c_a + lambda * sign(b_a))`. Along the segment
    /// the objective decreases; when a coordinate reaches zero first, the
    /// move stops there, the coordinate leaves the set and the solve is
    /// repeated. Returns whether `b` changed.
    fn polish(&self, active: &[usize], b: &mut [T], u: &mut [T]) -> bool {
        let m = self.m;
        let mut set = active.to_vec();
        let mut moved = false;
        while !set.is_empty() {
            let k = set.len();
            let mut sub = Vec::with_capacity(k * k);
            for &x in &set {
                for &y in &set {
                    sub.push(self.scale * self.a[x * m + y]);
                }
            }
            let Ok(chol) = SymMatrix::new(k, sub).and_then(|h| cholesky(&h)) else {
                return moved;
            };
            let rhs: Vec<T> = set.iter().map(|&x| -(self.linear[x] + self.lambda * b[x].signum())).collect();
            let target = chol.solve(&rhs);
            let mut t = T::one();
            let mut blocking = None;
            for (&v, &x) in target.iter().zip(&set) {
                if v.signum() != b[x].signum() || v == T::zero() {
                    let tx = b[x] / (b[x] - v);
                    if tx < t {
                        t = tx;
                        blocking = Some(x);
                    }
                }
            }
            for (&v, &x) in target.iter().zip(&set) {
                let next = if Some(x) == blocking { T::zero() } else { b[x] + t * (v - b[x]) };
                let delta = next - b[x];
                if delta != T::zero() {
                    b[x] = next;
                    moved = true;
                    for (ui, &aik) in u.iter_mut().zip(&self.a[x * m..(x + 1) * m]) {
                        *ui += aik * delta;
                    }
                }
            }
            match blocking {
                Some(x) => set.retain(|&y| y != x),
                None => break,
            }
        }
        moved
    }
}

/// Coordinate descent passes over the nonzeros before the next full pass.
const ACTIVE_PASSES: usize = 20;

/// Alternates full passes over `free` with work on the current nonzeros
/// until a full pass moves no coordinate by more than `tol`, or by more than
/// rounding noise in the gradient when that is larger. The work on the
/// nonzeros is an exact solve when the sign pattern allows it, otherwise
/// passes of coordinate descent; the exact solve is what keeps badly
/// conditioned columns from stalling.
pub(super) fn solve<T: Scalar>(prob: Problem<'_, T>, b: &mut [T], u: &mut [T], tol: T, max_passes: usize) -> usize {
    let mut passes = 0;
    let mut polished: Option<Vec<usize>> = None;
    while passes < max_passes {
        let floor = prob.noise_floor(b);
        let mut worst = T::zero();
        for &k in prob.free {
            worst = worst.max(prob.step(k, b, u));
        }
        passes += 1;
        if worst <= tol.max(floor) {
            break;
        }
        let active: Vec<usize> = prob.free.iter().copied().filter(|&k| b[k] != T::zero()).collect();
        if !active.is_empty() && polished.as_ref() != Some(&active) {
            let applied = prob.polish(&active, b, u);
            polished = Some(active.clone());
            if applied {
                passes += 1;
                continue;
            }
        }
        for _ in 0..ACTIVE_PASSES {
            if passes >= max_passes {
                break;
            }
            let mut worst = T::zero();
            for &k in &active {
                worst = worst.max(prob.step(k, b, u));
            }
            passes += 1;
            if worst <= tol.max(floor) {
                break;
            }
        }
    }
    passes
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthogonal_design_is_soft_threshold() {
        let a = [1.0f64, 0.0, 0.0, 1.0];
        let c = [-0.8, 0.05];
        let free = [0, 1];
        let mut b = [0.0f64; 2];
        let mut u = [0.0; 2];
        solve(Problem { a: &a, m: 2, scale: 2.0, linear: &c, lambda: 0.1, free: &free }, &mut b, &mut u, 1e-12, 100);
        assert!((b[0] - 0.35).abs() < 1e-12);
        assert_eq!(b[1], 0.0);
    }

    #[test]
    fn correlated_design_meets_optimality() {
        let a = [2.0f64, 0.6, 0.1, 0.6, 1.5, -0.3, 0.1, -0.3, 1.0];
        let c = [0.9, -0.7, 0.2];
        let free = [0, 1, 2];
        let lambda = 0.15;
        let mut b = [0.0f64; 3];
        let mut u = [0.0; 3];
        solve(Problem { a: &a, m: 3, scale: 1.0, linear: &c, lambda, free: &free }, &mut b, &mut u, 1e-14, 10_000);
        let fresh = mat_vec(&a, 3, &b);
        for k in 0..3 {
            assert!((fresh[k] - u[k]).abs() < 1e-12);
            let g = u[k] + c[k];
            if b[k] != 0.0 {
                assert!((g + lambda * b[k].signum()).abs() < 1e-9);
            } else {
                assert!(g.abs() <= lambda + 1e-9);
            }
        }
    }

    #[test]
    fn restricted_coordinates_stay_zero() {
        let a = [1.0f64, 0.5, 0.5, 1.0];
        let c = [-1.0, -1.0];
        let free = [1];
        let mut b = [0.0f64; 2];
        let mut u = [0.0; 2];
        solve(Problem { a: &a, m: 2, scale: 1.0, linear: &c, lambda: 0.0, free: &free }, &mut b, &mut u, 1e-14, 100);
        assert_eq!(b[0], 0.0);
        assert!((b[1] - 1.0).abs() < 1e-12);
    }
}
