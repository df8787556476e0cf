use proptest::prelude::*;

use sparse_precision::linalg::{
    cholesky, norm_elem_max, norm_frobenius, norm_linf_op, norm_spectral, DenseMatrix, SymMatrix,
};
use sparse_precision::models::{build_chain, build_grid, build_star, ModelSpec};
use sparse_precision::sampling::{sample_covariance, sample_gaussian, Seed};
use sparse_precision::solver::{check_kkt, solve, SolverConfig, Support};
use sparse_precision::theory::{diagnostics, gamma_blocks, remainder_check, TailModel};

/// `B B' + shift * I` from a flat `p x p` array.
fn spd_from(p: usize, raw: &[f64], shift: f64) -> SymMatrix<f64> {
    let b = DenseMatrix::new(p, p, raw[..p * p].to_vec()).unwrap();
    let bbt = b.matmul(&b.transpose());
    SymMatrix::from_upper_fn(p, |i, j| bbt.get(i, j) + if i == j { shift } else { 0.0 })
}

fn spd() -> impl Strategy<Value = SymMatrix<f64>> {
    (2usize..8).prop_flat_map(|p| {
        (prop::collection::vec(-1.0f64..1.0, p * p), 0.05f64..1.0)
            .prop_map(move |(raw, shift)| spd_from(p, &raw, shift))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cholesky_reconstructs_and_inverts(a in spd()) {
        let chol = cholesky(&a).unwrap();
        let scale = norm_elem_max(&a);
        prop_assert!(chol.reconstruct().max_abs_diff(&a).unwrap() <= 1e-12 * scale);
        let prod = a.matmul(&chol.inverse()).unwrap();
        prop_assert!(prod.max_abs_diff_identity() <= 1e-8);
    }

    #[test]
    fn norm_ordering(a in spd()) {
        let p = a.dim() as f64;
        let (elem, op, frob) = (norm_elem_max(&a), norm_linf_op(&a), norm_frobenius(&a));
        let spec = norm_spectral(&a).unwrap();
        let slack = 1e-10 * op;
        prop_assert!(elem <= spec + slack);
        prop_assert!(spec <= op + slack);
        prop_assert!(spec <= frob + slack);
        prop_assert!(frob <= p.sqrt() * spec + slack);
        prop_assert!(op <= p * elem + slack);
    }

    #[test]
    fn solver_meets_kkt_and_descends(a in spd(), lambda in 0.01f64..0.5) {
        let fit = solve(&a, &SolverConfig::new(lambda)).unwrap();
        prop_assert!(fit.converged);
        prop_assert!(fit.kkt_residual <= 1e-7);
        let report = check_kkt(&a, &fit.theta_hat, lambda, 1e-5).unwrap();
        prop_assert_eq!(report.sign_violations, 0);
        prop_assert!(report.max_subgradient_excess <= 1e-5);
        for w in fit.objective_trace.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-10 * w[0].abs().max(1.0));
        }
    }

    #[test]
    fn gamma_blocks_are_kronecker_entries(a in spd(), mask in prop::collection::vec(any::<bool>(), 3)) {
        let p = a.dim().min(3);
        let sigma = SymMatrix::from_upper_fn(p, |i, j| a.get(i, j));
        let mut edges = sparse_precision::models::EdgeSet::new();
        for (k, &(i, j)) in [(0, 1), (0, 2), (1, 2)].iter().enumerate() {
            if mask[k] && j < p {
                edges.insert(i, j);
            }
        }
        let blocks = gamma_blocks(&sigma, &Support::from_edges(p, &edges)).unwrap();
        for (r, &(j, k)) in blocks.s_pairs.iter().enumerate() {
            for (c, &(l, m)) in blocks.s_pairs.iter().enumerate() {
                prop_assert_eq!(blocks.gamma_ss.get(r, c), sigma.get(j, l) * sigma.get(k, m));
            }
        }
        for (r, &(j, k)) in blocks.sc_pairs.iter().enumerate() {
            for (c, &(l, m)) in blocks.s_pairs.iter().enumerate() {
                prop_assert_eq!(blocks.gamma_scs.get(r, c), sigma.get(j, l) * sigma.get(k, m));
            }
        }
    }

    #[test]
    fn remainder_within_bound(which in 0usize..3, frac in 0.0f64..1.0, raw in prop::collection::vec(-1.0f64..1.0, 256)) {
        let model: ModelSpec<f64> = match which {
            0 => build_chain(8, 0.3).unwrap(),
            1 => build_star(9, 4, 0.3).unwrap(),
            _ => build_grid(3, 0.15).unwrap(),
        };
        let k_sigma = diagnostics(&model).unwrap().k_sigma;
        let radius = frac / (3.0 * k_sigma * model.degree_d as f64);
        let p = model.p();
        let delta = SymMatrix::from_upper_fn(p, |i, j| {
            if i == j || model.edges.contains(i, j) { radius * raw[i * p + j] } else { 0.0 }
        });
        let check = remainder_check(&model, k_sigma, &delta).unwrap();
        prop_assert!(check.in_range);
        prop_assert!(check.r_inf <= check.bound * (1.0 + 1e-9) + 1e-15);
    }

    #[test]
    fn tail_inverse_monotone(n in 10usize..10_000, r in 2.0f64..1e6, sigma in 0.5f64..2.0) {
        let tail = TailModel::subgaussian(sigma, 1.5).unwrap();
        let d = tail.delta_inverse(n, r).unwrap();
        prop_assert!(tail.delta_inverse(2 * n, r).unwrap() < d);
        prop_assert!(tail.delta_inverse(n, 2.0 * r).unwrap() > d);
        let poly = TailModel::polynomial(4, 3.0, 1.5).unwrap();
        let d = poly.delta_inverse(n, r).unwrap();
        prop_assert!(poly.delta_inverse(2 * n, r).unwrap() < d);
        prop_assert!(poly.delta_inverse(n, 2.0 * r).unwrap() > d);
    }

    #[test]
    fn covariance_of_concatenation_is_weighted(n1 in 1usize..40, n2 in 1usize..40, seed in any::<u64>()) {
        let model = build_chain(5, 0.3).unwrap();
        let a = sample_gaussian(&model, n1, &Seed::new(seed).child(1)).unwrap();
        let b = sample_gaussian(&model, n2, &Seed::new(seed).child(2)).unwrap();
        let joint = sample_covariance(&a.concat(&b).unwrap());
        let (sa, sb) = (sample_covariance(&a), sample_covariance(&b));
        let (w1, w2) = (n1 as f64, n2 as f64);
        let mixed = SymMatrix::from_upper_fn(5, |i, j| (w1 * sa.get(i, j) + w2 * sb.get(i, j)) / (w1 + w2));
        prop_assert!(joint.max_abs_diff(&mixed).unwrap() <= 1e-12 * (1.0 + norm_elem_max(&joint)));
    }
}
