use super::*;
use crate::linalg::{norm_elem_max, SymMatrix};
use crate::models::{build_chain, build_custom, build_diamond, build_star, EdgeSet};
use crate::solver::{SolverConfig, Support};

fn identity_model(p: usize) -> crate::models::ModelSpec<f64> {
    build_custom(SymMatrix::identity(p)).unwrap()
}

#[test]
fn identity_diagnostics() {
    let d = diagnostics(&identity_model(4)).unwrap();
    assert_eq!((d.k_sigma, d.k_gamma, d.alpha), (1.0, 1.0, 1.0));
    assert!(d.incoherent);
    assert_eq!(d.complexity_k, Some(9.0));
}

#[test]
fn identity_gamma_blocks() {
    let g = gamma_blocks(&SymMatrix::<f64>::identity(3), &Support::diagonal(3)).unwrap();
    assert_eq!(g.gamma_ss, SymMatrix::identity(3));
    assert_eq!(g.gamma_scs.max_abs(), 0.0);
    assert_eq!(g.sc_pairs.len(), 6);
}

#[test]
fn two_by_two_gamma_entry() {
    let rho = 0.4;
    let sigma = SymMatrix::from_rows(&[vec![1.0, rho], vec![rho, 1.0]]).unwrap();
    let edges: EdgeSet = [(0, 1)].into_iter().collect();
    let g = gamma_blocks(&sigma, &Support::from_edges(2, &edges)).unwrap();
    // Pairs in order (0,0), (0,1), (1,0), (1,1).
    assert_eq!(g.gamma_ss.get(1, 1), 1.0);
    assert_eq!(g.gamma_ss.get(1, 2), rho * rho);
    assert_eq!(g.gamma_ss.get(0, 3), rho * rho);
    assert_eq!(g.gamma_ss.get(0, 1), rho);
}

#[test]
fn diamond_closed_form() {
    for rho in [0.05f64, 0.1, 0.15, 0.2] {
        let d = diagnostics(&build_diamond(rho).unwrap()).unwrap();
        assert!(((1.0 - d.alpha) - 4.0 * rho * (rho + 1.0)).abs() < 1e-6, "rho={rho}");
    }
    assert!(!diagnostics(&build_diamond(0.3).unwrap()).unwrap().incoherent);
}

#[test]
fn star_closed_form() {
    for rho in [0.1f64, 0.2, 0.3, 0.4] {
        let d = diagnostics(&build_star(4, 3, rho).unwrap()).unwrap();
        assert!(((1.0 - d.alpha) - rho * (rho + 2.0)).abs() < 1e-6, "rho={rho}");
    }
}

#[test]
fn lambda_theory_composition() {
    let tail = TailModel::gaussian(1.0);
    let a = lambda_theory(1.0f64, &tail, 400, 64, 3.0).unwrap();
    let b = lambda_theory(0.5, &tail, 400, 64, 3.0).unwrap();
    assert!((b - 2.0 * a).abs() < 1e-12);
    assert!((a - 8.0 * tail.delta_inverse(400, 64f64.powi(3)).unwrap()).abs() < 1e-12);
    assert!(lambda_theory(0.0, &tail, 400, 64, 3.0).is_err());
    assert!(lambda_theory(1.0, &tail, 400, 64, 2.0).is_err());
}

#[test]
fn identity_threshold_by_hand() {
    let diag = diagnostics(&identity_model(10)).unwrap();
    let tail = TailModel::gaussian(1.0);
    let n = threshold_ellinf(&diag, &tail, 10, 3.0).unwrap();
    let expected = (4000f64).ln() * 3200.0 * 54.0 * 54.0;
    assert!((n / expected - 1.0).abs() < 1e-12);
    // No edges: the selection threshold coincides.
    assert_eq!(threshold_model_selection(&diag, &tail, 10, 3.0).unwrap(), n);
}

#[test]
fn thresholds_respond_to_degree_and_theta_min() {
    let tail = TailModel::gaussian(1.0);
    let mut diag = diagnostics(&build_chain(16, 0.2f64).unwrap()).unwrap();
    let base = threshold_ellinf(&diag, &tail, 16, 3.0).unwrap();
    diag.degree_d += 2;
    assert!(threshold_ellinf(&diag, &tail, 16, 3.0).unwrap() > base);
    diag.degree_d -= 2;

    diag.theta_min = Some(1e9);
    assert_eq!(threshold_model_selection(&diag, &tail, 16, 3.0).unwrap(), base);
    diag.theta_min = Some(1e-3);
    let small = threshold_model_selection(&diag, &tail, 16, 3.0).unwrap();
    diag.theta_min = Some(5e-4);
    let half = threshold_model_selection(&diag, &tail, 16, 3.0).unwrap();
    assert!((half / small - 4.0).abs() < 1e-9);
}

#[test]
fn v_star_dominant_threshold() {
    let tail = TailModel::gaussian(1.0);
    let mut diag = diagnostics(&identity_model(5)).unwrap();
    // Shrink the structural term below v* = 1/40.
    diag.k_gamma = 1e-5;
    diag.k_sigma = 1e-2;
    let n = threshold_ellinf(&diag, &tail, 5, 3.0).unwrap();
    let expected = tail.n_inverse(40.0, 125.0).unwrap();
    assert!((n - expected).abs() < 1e-9);
}

#[test]
fn predicted_bounds_by_hand() {
    let diag = diagnostics(&identity_model(5)).unwrap();
    let tail = TailModel::gaussian(1.0);
    let b = predicted_bounds(&diag, &tail, 100, 5, 3.0).unwrap();
    let db = ((500.0f64).ln() * 3200.0 / 100.0).sqrt();
    assert!((b.delta_bar - db).abs() < 1e-12);
    assert!((b.ellinf - 18.0 * db).abs() < 1e-9);
    assert!((b.frobenius - 18.0 * db * 5f64.sqrt()).abs() < 1e-9);
    assert!((b.spectral - 18.0 * db).abs() < 1e-9);
    assert!((b.cov_ellinf - (18.0 * db + 486.0 * db * db)).abs() < 1e-6);
    assert!((b.cov_spectral - (18.0 * db + 486.0 * db * db)).abs() < 1e-6);
    let q = predicted_bounds(&diag, &tail, 400, 5, 3.0).unwrap();
    assert!((q.ellinf * 2.0 - b.ellinf).abs() < 1e-9);
    assert!(b.spectral <= b.frobenius);
}

#[test]
fn remainder_basics() {
    let model = build_chain(5, 0.3).unwrap();
    let r = remainder(&model.theta_star, &SymMatrix::zeros(5)).unwrap();
    assert!(norm_elem_max(&r) < 1e-14);

    let (theta, delta) = (2.0f64, 0.3);
    let r = remainder(&SymMatrix::from_diag(&[theta]), &SymMatrix::from_diag(&[delta])).unwrap();
    let expected = 1.0 / (theta + delta) - 1.0 / theta + delta / (theta * theta);
    assert!((r.get(0, 0) - expected).abs() < 1e-15);
    assert!(expected > 0.0);
}

#[test]
fn witness_population_chain() {
    let model = build_chain(16, 0.2).unwrap();
    let cfg = SolverConfig::new(0.0).with_tol(1e-10);
    let w = witness_construct(&model, &model.sigma_star, 0.01, &cfg).unwrap();
    assert!(w.strict_dual_feasible);
    assert!(w.sign_consistent);
    assert!(w.ell_inf_error <= w.lemma6_radius);
    assert_eq!(w.matches_full_solve, Some(true));
    assert_eq!(w.w_inf, 0.0);
}

#[test]
fn witness_huge_lambda_loses_edges() {
    let model = build_chain(6, 0.3).unwrap();
    let cfg = SolverConfig::new(0.0).with_tol(1e-10);
    let w = witness_construct(&model, &model.sigma_star, 10.0, &cfg).unwrap();
    assert!(w.restricted_result.theta_hat.is_diagonal());
    assert!(w.strict_dual_feasible);
    assert!(!w.sign_consistent);
    assert!(witness_construct(&model, &model.sigma_star, 0.0, &cfg).is_err());
}

#[test]
fn noise_event_at_truth() {
    let model = build_chain(8, 0.2).unwrap();
    let tail = TailModel::gaussian(model.max_variance());
    let e = noise_event_check(&model, &model.sigma_star, &tail, 100, 8, 3.0).unwrap();
    assert_eq!(e.w_inf, 0.0);
    assert!(e.event_holds);
}
