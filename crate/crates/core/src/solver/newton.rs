//! Damped Newton refinement on a fixed sign pattern.
//!
//! With the zero pattern and the signs of `Theta` frozen, the penalty is
//! linear and the objective is smooth in the free entries (the diagonal plus
//! the current off-diagonal nonzeros). Its Hessian is `W (x) W` restricted
//! to those entries. Steps stop at the first entry reaching zero and are
//! cut back to stay in the cone, so the smooth objective and the penalized
//! one agree along the whole path.

use crate::linalg::{cholesky, Cholesky, SymMatrix};
use crate::scalar::{sign, Scalar};

/// Largest number of free entries the dense Hessian is built for.
pub(super) const MAX_FREE: usize = 1500;

pub(super) struct Refined<T> {
    pub theta: SymMatrix<T>,
    pub chol: Cholesky<T>,
    pub objective: T,
}

/// Off-diagonal nonzeros `(i, j)`, `i < j`, with their signs.
pub(super) fn sign_pattern<T: Scalar>(theta: &SymMatrix<T>) -> Vec<(usize, usize, bool)> {
    let p = theta.dim();
    (0..p)
        .flat_map(|i| (i + 1..p).map(move |j| (i, j)))
        .filter_map(|(i, j)| {
            let v = theta.get(i, j);
            (v != T::zero()).then_some((i, j, v > T::zero()))
        })
        .collect()
}

/// Free entries `(i, j)`, `i <= j`: the diagonal and off-diagonal nonzeros.
fn free_entries<T: Scalar>(theta: &SymMatrix<T>) -> Vec<(usize, usize)> {
    let p = theta.dim();
    (0..p).flat_map(|i| (i..p).map(move |j| (i, j))).filter(|&(i, j)| i == j || theta.get(i, j) != T::zero()).collect()
}

fn objective<T: Scalar>(s: &SymMatrix<T>, theta: &SymMatrix<T>, chol: &Cholesky<T>, lambda: T) -> T {
    theta.trace_product(s).expect("same dimension") - chol.log_det() + lambda * theta.offdiag_l1()
}

/// `W (x) W` on the free parameters. A diagonal parameter moves one entry,
/// an off-diagonal one moves `(i, j)` and `(j, i)` together.
fn hessian<T: Scalar>(w: &[T], p: usize, free: &[(usize, usize)]) -> Vec<T> {
    let nf = free.len();
    let two = T::lit(2.0);
    let mut h = vec![T::zero(); nf * nf];
    for (x, &(i, j)) in free.iter().enumerate() {
        let (wi, wj) = (&w[i * p..(i + 1) * p], &w[j * p..(j + 1) * p]);
        for (y, &(k, l)) in free.iter().enumerate().skip(x) {
            let v = match (i == j, k == l) {
                (true, true) => wi[k] * wi[k],
                (true, false) => two * wi[k] * wi[l],
                (false, true) => two * wi[k] * wj[k],
                (false, false) => two * (wj[k] * wi[l] + wj[l] * wi[k]),
            };
            h[x * nf + y] = v;
            h[y * nf + x] = v;
        }
    }
    h
}

/// Runs at most `max_iter` Newton steps from `theta` (objective `obj`).
/// An entry that would cross zero is stopped at zero and leaves the free
/// set, so every iterate keeps a sign pattern contained in the starting
/// one. Returns `None` when no step decreased the objective.
pub(super) fn refine<T: Scalar>(
    s: &SymMatrix<T>,
    theta: &SymMatrix<T>,
    obj: T,
    lambda: T,
    grad_tol: T,
    max_iter: usize,
) -> Option<Refined<T>> {
    let p = s.dim();
    let mut cur = theta.clone();
    let mut cur_obj = obj;
    let mut cur_chol = cholesky(&cur).ok()?;
    let mut improved = false;
    let mut prev_worst = T::infinity();

    for _ in 0..max_iter {
        let free = free_entries(&cur);
        let nf = free.len();
        if nf > MAX_FREE {
            break;
        }
        let signs: Vec<T> = free.iter().map(|&(i, j)| if i == j { T::zero() } else { sign(cur.get(i, j)) }).collect();
        let w = cur_chol.inverse();
        // Gradient with respect to the free parameters; off-diagonal
        // parameters move two entries.
        let entry_grad: Vec<T> =
            free.iter().zip(&signs).map(|(&(i, j), &sg)| s.get(i, j) - w.get(i, j) + lambda * sg).collect();
        // Newton at least halves the gradient until rounding noise takes
        // over; a smaller gain means the noise floor has been reached.
        let worst = entry_grad.iter().fold(T::zero(), |m, g| m.max(g.abs()));
        if worst <= grad_tol || worst > prev_worst / T::lit(2.0) {
            break;
        }
        prev_worst = T::infinity();
        let grad: Vec<T> = free.iter().zip(&entry_grad).map(|(&(i, j), &g)| if i == j { g } else { g + g }).collect();

        let h = hessian(w.as_slice(), p, &free);
        let Ok(hc) = cholesky(&SymMatrix::from_raw(nf, h)) else { break };
        let step: Vec<T> = hc.solve(&grad).into_iter().map(|v| -v).collect();
        let slope: T = step.iter().zip(&grad).map(|(&a, &b)| a * b).sum();
        if !(slope < T::zero()) {
            break;
        }

        // Fraction of the step at which the first off-diagonal entry hits zero.
        let mut t_zero = T::infinity();
        for (k, &(i, j)) in free.iter().enumerate() {
            let v = cur.get(i, j);
            if i != j && sign(v + step[k]) != signs[k] {
                t_zero = t_zero.min(v / -step[k]);
            }
        }
        let mut t = T::one().min(t_zero);
        let mut accepted = None;
        for _ in 0..40 {
            let mut data = cur.as_slice().to_vec();
            for (k, &(i, j)) in free.iter().enumerate() {
                let before = data[i * p + j];
                let mut v = before + t * step[k];
                // Crossed, or landed on zero up to rounding at t = t_zero.
                if i != j && (sign(v) != signs[k] || v.abs() <= T::lit(4.0) * T::epsilon() * before.abs()) {
                    v = T::zero();
                }
                data[i * p + j] = v;
                data[j * p + i] = v;
            }
            let cand = SymMatrix::from_raw(p, data);
            if let Ok(chol) = cholesky(&cand) {
                let f = objective(s, &cand, &chol, lambda);
                if f < cur_obj && f <= cur_obj + T::lit(1e-4) * t * slope {
                    accepted = Some((cand, chol, f, t == T::one()));
                    break;
                }
            }
            t /= T::lit(2.0);
        }
        let Some((cand, chol, f, full)) = accepted else { break };
        if full {
            prev_worst = worst;
        }
        cur = cand;
        cur_chol = chol;
        cur_obj = f;
        improved = true;
    }
    improved.then_some(Refined { theta: cur, chol: cur_chol, objective: cur_obj })
}
