use super::*;
use crate::linalg::norm_elem_max;
use crate::models::{build_chain, EdgeSet};

fn cfg(lambda: f64) -> SolverConfig<f64> {
    SolverConfig::new(lambda).with_tol(1e-10)
}

fn m(rows: &[&[f64]]) -> SymMatrix<f64> {
    SymMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

fn assert_invariants(s: &SymMatrix<f64>, r: &SolveResult<f64>) {
    let prod = r.w_hat.matmul(&r.theta_hat).unwrap();
    assert!(prod.max_abs_diff_identity() < 1e-6);
    for i in 0..s.dim() {
        assert_eq!(r.z_hat.get(i, i), 0.0);
        assert!((r.w_hat.get(i, i) - s.get(i, i)).abs() <= 1e-9);
        for j in 0..s.dim() {
            assert!(r.z_hat.get(i, j).abs() <= 1.0 + 1e-9);
        }
    }
    let recomputed = norm_elem_max(&s.sub(&r.w_hat).unwrap().add(&r.z_hat.scale(r.lambda)).unwrap());
    assert!((recomputed - r.kkt_residual).abs() < 1e-12, "{recomputed} vs {}", r.kkt_residual);
    for pair in r.objective_trace.windows(2) {
        assert!(pair[1] <= pair[0] + 1e-10 * pair[0].abs().max(1.0));
    }
}

#[test]
fn diagonal_input_gives_diagonal_inverse() {
    let s = SymMatrix::from_diag(&[2.0, 0.5, 4.0]);
    let r = solve(&s, &cfg(0.3)).unwrap();
    assert!(r.converged);
    assert_eq!(r.theta_hat, SymMatrix::from_diag(&[0.5, 2.0, 0.25]));
    assert_eq!(r.z_hat, SymMatrix::zeros(3));
    assert_eq!(r.sweeps, 0);
}

#[test]
fn two_by_two_closed_form() {
    let s = m(&[&[1.0, 0.5], &[0.5, 1.0]]);
    let r = solve(&s, &cfg(0.1)).unwrap();
    assert_invariants(&s, &r);
    let k = 1.0 / 0.84;
    let expected = m(&[&[k, -0.4 * k], &[-0.4 * k, k]]);
    assert!(r.theta_hat.max_abs_diff(&expected).unwrap() < 1e-9);
    assert!((r.w_hat.get(0, 1) - 0.4).abs() < 1e-9);
    assert!((r.z_hat.get(0, 1) + 1.0).abs() < 1e-12);
}

#[test]
fn large_lambda_gives_diagonal() {
    let s = m(&[&[1.0, 0.3, -0.2], &[0.3, 2.0, 0.25], &[-0.2, 0.25, 1.5]]);
    let r = solve(&s, &cfg(0.31)).unwrap();
    assert!(r.converged);
    assert!(r.theta_hat.is_diagonal());
    for i in 0..3 {
        assert!((r.theta_hat.get(i, i) - 1.0 / s.get(i, i)).abs() < 1e-12);
    }
    assert!((r.z_hat.get(0, 1) - (-0.3 / 0.31)).abs() < 1e-12);
}

#[test]
fn dense_problem_satisfies_invariants() {
    let s = m(&[&[1.0, 0.45, 0.2, -0.1], &[0.45, 1.2, 0.3, 0.05], &[0.2, 0.3, 0.9, -0.35], &[-0.1, 0.05, -0.35, 1.1]]);
    for lambda in [0.01, 0.05, 0.2] {
        let r = solve(&s, &cfg(lambda)).unwrap();
        assert!(r.converged);
        assert_invariants(&s, &r);
        assert!(r.max_dual_excess <= 1e-9);
        let rep = check_kkt(&s, &r.theta_hat, lambda, 1e-6).unwrap();
        assert_eq!(rep.sign_violations, 0);
        assert!(rep.max_subgradient_excess <= 1e-8);
        assert!(rep.diagonal_residual <= 1e-9);
    }
}

#[test]
fn initializations_agree() {
    let s = m(&[&[2.0, 0.8, 0.3], &[0.8, 1.0, -0.4], &[0.3, -0.4, 1.5]]);
    let a = solve(&s, &cfg(0.05)).unwrap();
    let b = solve(&s, &cfg(0.05).with_init(Init::Identity)).unwrap();
    assert!(a.theta_hat.max_abs_diff(&b.theta_hat).unwrap() < 1e-9);
}

#[test]
fn lambda_zero_is_inverse() {
    let s = m(&[&[4.0, 2.0], &[2.0, 3.0]]);
    let r = solve(&s, &cfg(0.0)).unwrap();
    assert!(r.theta_hat.max_abs_diff(&inverse_spd(&s).unwrap()).unwrap() < 1e-14);
    let singular = m(&[&[1.0, 1.0], &[1.0, 1.0]]);
    assert!(matches!(solve(&singular, &cfg(0.0)), Err(Error::NotPositiveDefinite { .. })));
    // The same singular input is fine once penalized.
    assert!(solve(&singular, &cfg(0.1)).unwrap().converged);
}

#[test]
fn rejects_bad_input() {
    let s = m(&[&[1.0, 0.0], &[0.0, 0.0]]);
    assert!(matches!(solve(&s, &cfg(0.1)), Err(Error::NonPositiveDiagonal { index: 1, .. })));
    let ok = SymMatrix::identity(2);
    assert!(solve(&ok, &cfg(-1.0)).is_err());
    assert!(solve_restricted(&ok, &Support::full(3), &cfg(0.1)).is_err());
}

#[test]
fn restricted_diagonal_and_full() {
    let s = m(&[&[1.0, 0.5, 0.2], &[0.5, 1.0, 0.4], &[0.2, 0.4, 1.0]]);
    let d = solve_restricted(&s, &Support::diagonal(3), &cfg(0.01)).unwrap();
    assert_eq!(d.theta_hat, SymMatrix::identity(3));
    assert_eq!(d.z_hat, SymMatrix::zeros(3));

    let full = solve_restricted(&s, &Support::full(3), &cfg(0.01)).unwrap();
    let free = solve(&s, &cfg(0.01)).unwrap();
    assert!(full.theta_hat.max_abs_diff(&free.theta_hat).unwrap() < 1e-9);
}

#[test]
fn restricted_population_chain() {
    let model = build_chain(8, 0.3).unwrap();
    let support = Support::from_edges(8, &model.edges);
    let r = solve_restricted(&model.sigma_star, &support, &cfg(1e-4)).unwrap();
    assert!(r.converged);
    for i in 0..8 {
        for j in 0..8 {
            if (i as isize - j as isize).abs() > 1 {
                assert_eq!(r.theta_hat.get(i, j), 0.0);
            }
        }
    }
    assert!(r.theta_hat.max_abs_diff(&model.theta_star).unwrap() < 1e-2);
}

#[test]
fn restricted_zero_lambda_partial_support() {
    let s = m(&[&[1.0, 0.5, 0.3], &[0.5, 1.0, 0.5], &[0.3, 0.5, 1.0]]);
    let edges: EdgeSet = [(0, 1), (1, 2)].into_iter().collect();
    let r = solve_restricted(&s, &Support::from_edges(3, &edges), &cfg(0.0)).unwrap();
    assert!(r.converged);
    assert_eq!(r.theta_hat.get(0, 2), 0.0);
    // Covariance selection: the fitted covariance matches S on the support.
    assert!((r.w_hat.get(0, 1) - 0.5).abs() < 1e-9);
    assert!((r.w_hat.get(0, 2) - 0.25).abs() < 1e-9);
}

#[test]
fn check_kkt_flags_unpenalized_inverse() {
    let s = m(&[&[1.0, 0.6, 0.3], &[0.6, 1.0, 0.6], &[0.3, 0.6, 1.0]]);
    let theta = inverse_spd(&s).unwrap();
    let rep = check_kkt(&s, &theta, 1.0, 1e-8).unwrap();
    // W - S = 0, so Z = 0 where theta is nonzero.
    assert!(rep.sign_violations > 0);
    assert!(rep.max_stationarity_violation > 0.9);
    assert!(check_kkt(&s, &theta, 0.0, 1e-8).is_err());

    let d = SymMatrix::from_diag(&[1.0, 2.0]);
    let rep = check_kkt(&d, &SymMatrix::from_diag(&[1.0, 0.5]), 0.1, 1e-8).unwrap();
    assert!(rep.worst() < 1e-12);
    assert_eq!(rep.sign_violations, 0);
}

#[test]
fn check_kkt_excess_on_zero_entries() {
    // Diagonal theta when lambda is smaller than |S_01|: excess is |S_01|/lambda - 1.
    let s = m(&[&[1.0, 0.5, 0.0], &[0.5, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
    let rep = check_kkt(&s, &SymMatrix::identity(3), 0.25, 1e-8).unwrap();
    assert!((rep.max_subgradient_excess - 1.0).abs() < 1e-12);
}

#[test]
fn works_in_f32() {
    let s = SymMatrix::<f32>::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
    let cfg = SolverConfig::new(0.1f32).with_tol(1e-5);
    let r = solve(&s, &cfg).unwrap();
    assert!(r.converged);
    assert!((r.theta_hat.get(0, 1) + 0.4 / 0.84).abs() < 1e-4);
}

#[test]
fn not_converged_is_reported() {
    let s = m(&[&[1.0, 0.7, 0.5], &[0.7, 1.0, 0.7], &[0.5, 0.7, 1.0]]);
    let mut c = cfg(0.01);
    c.max_outer_sweeps = 1;
    c.tol = 1e-15;
    let r = solve(&s, &c).unwrap();
    assert!(!r.converged);
    assert!(matches!(r.ensure_converged(), Err(Error::NotConverged { .. })));
}
