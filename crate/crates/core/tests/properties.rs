//! Cross-module invariants as property tests.

use degreenet::estimate::{parse_edge_list, pi_hat};
use degreenet::sampler::{replicate_weights, sample_graph, sample_population, with_pool, SampleOptions};
use degreenet::specfun::{beta_ratio_step, binom_survival, iota, reg_inc_beta, survival_bounds};
use degreenet::weights::{apply_scaling, BoundedParetoModel, ScalingMap, WeightModel, WeightVector};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn beta_reflection(x in 0.0f64..=1.0, a in 0.05f64..200.0, b in 0.05f64..200.0) {
        let s = reg_inc_beta(x, a, b).unwrap() + reg_inc_beta(1.0 - x, b, a).unwrap();
        prop_assert!((s - 1.0).abs() < 1e-12, "{s}");
    }

    #[test]
    fn iota_links_neighbouring_tails(n in 2u64..1000, frac in 0.0f64..1.0, mu in 0.01f64..0.99) {
        let k = ((n - 1) as f64 * frac) as u64;
        let kf = k as f64;
        let lhs = iota(k, n, mu).unwrap() * reg_inc_beta(mu, kf + 1.0, (n - k) as f64).unwrap();
        let rhs = reg_inc_beta(mu, kf + 2.0, (n - k) as f64).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12, "{lhs} vs {rhs}");
    }

    #[test]
    fn survival_sandwich(n in 1u64..2000, frac in 0.0f64..1.0, mu in 0.01f64..0.99) {
        let k = ((n - 1) as f64 * frac) as u64;
        let s = binom_survival(k, n, mu).unwrap();
        let b = survival_bounds(k, n, mu).unwrap();
        prop_assert!(b.lower <= s && s <= b.upper, "{} <= {s} <= {}", b.lower, b.upper);
    }

    #[test]
    fn ratio_increments_bounded(n in 2u64..1000, frac in 0.0f64..1.0, mu in 0.01f64..0.99) {
        let k = ((n - 1) as f64 * frac) as u64;
        let (kf, nf) = (k as f64, n as f64);
        let next = beta_ratio_step(mu, kf + 2.0, nf - kf).unwrap();
        let diff = (kf + 2.0) / (nf + 2.0) * next - (kf + 1.0) / (nf + 1.0) * iota(k, n, mu).unwrap();
        prop_assert!(diff < 1.0 / (nf + 2.0), "{diff}");
    }

    #[test]
    fn scaling_clamps_after_the_affine_map(
        v in prop::collection::vec(0.0f64..=1.0, 2..50),
        gamma in 0.0f64..0.5,
        zeta in 0.0f64..50.0,
        zeta_prime in 0.0f64..2.0,
    ) {
        let n = v.len();
        let pi = WeightVector::new(v.clone(), "prop", None).unwrap();
        let map = ScalingMap::new(gamma, zeta, 0.0, zeta_prime).unwrap();
        let out = apply_scaling(&pi, &map, n).unwrap();
        for (x, y) in v.iter().zip(out.values()) {
            prop_assert_eq!(*y, map.scale(n).mul_add(*x, map.shift(n)).min(1.0));
        }
    }

    #[test]
    fn pure_scalings_compose(v in prop::collection::vec(0.0f64..=1.0, 2..50), z1 in 0.0f64..1.0, z2 in 0.0f64..1.0) {
        // With ζ ≤ 1 at γ = 0 nothing is clamped, so the multipliers multiply.
        let n = v.len();
        let pi = WeightVector::new(v, "prop", None).unwrap();
        let (a, b) = (ScalingMap::sparse(0.0, z1).unwrap(), ScalingMap::sparse(0.0, z2).unwrap());
        let twice = apply_scaling(&apply_scaling(&pi, &a, n).unwrap(), &b, n).unwrap();
        let once = apply_scaling(&pi, &ScalingMap::sparse(0.0, z1 * z2).unwrap(), n).unwrap();
        for (x, y) in twice.values().iter().zip(once.values()) {
            prop_assert!((x - y).abs() <= 4.0 * f64::EPSILON, "{x} vs {y}");
        }
    }

    #[test]
    fn weight_draws_repeat_under_a_seed(seed in any::<u64>(), r in 0u64..100) {
        let model = WeightModel::BoundedPareto(BoundedParetoModel::new(3.0, 0.25, 1.0).unwrap());
        let a = replicate_weights(&model, None, 64, seed, r).unwrap();
        let b = replicate_weights(&model, None, 64, seed, r).unwrap();
        prop_assert_eq!(a.values(), b.values());
    }

    #[test]
    fn edge_list_and_degrees_give_the_same_estimate(
        v in prop::collection::vec(0.2f64..=1.0, 3..40),
        seed in any::<u64>(),
    ) {
        let pi = WeightVector::new(v, "prop", None).unwrap();
        let g = sample_graph(&pi, seed, 0, true).unwrap();
        prop_assume!(g.edge_count > 0);
        let text: String = g.edges.as_ref().unwrap().iter().map(|(i, j)| format!("{i} {j}\n")).collect();
        let from_edges = parse_edge_list(&text, false, Some(pi.len())).unwrap();
        let degrees: Vec<u64> = g.degrees.iter().map(|&d| d as u64).collect();
        prop_assert_eq!(&from_edges, &degrees);
        prop_assert_eq!(pi_hat(&from_edges).unwrap(), pi_hat(&degrees).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn populations_ignore_thread_count(seed in any::<u64>(), threads in 2usize..6) {
        let model = WeightModel::BoundedPareto(BoundedParetoModel::new(2.0, 0.1, 1.0).unwrap());
        let opts = SampleOptions::default();
        let one = with_pool(Some(1), || sample_population(&model, None, 300, 5, seed, &opts).unwrap());
        let many = with_pool(Some(threads), || sample_population(&model, None, 300, 5, seed, &opts).unwrap());
        prop_assert_eq!(one, many);
    }
}
