use broadcast_recon::alice_bob::{
    dominance_excess, equivariance_check, nu1_mix, nu2_mix, run_alice, sample_instance, BobArray, PermutationAction,
    Reductions,
};
use broadcast_recon::belief_recursion::SimplexVector;
use broadcast_recon::rng::RngStream;
use broadcast_recon::star_measures::{QuantileReduction, StarMeasure};
use broadcast_recon::tree_model::{CountLaw, OffspringLaw};
use proptest::prelude::*;

fn simplex(k: usize) -> impl Strategy<Value = SimplexVector> {
    prop::collection::vec(0.0f64..1.0, k).prop_filter("nonzero", |v| v.iter().sum::<f64>() > 1e-6).prop_map(|v| {
        let s: f64 = v.iter().sum();
        SimplexVector(v.into_iter().map(|x| x / s).collect())
    })
}

fn perm(k: usize) -> impl Strategy<Value = PermutationAction> {
    any::<u64>().prop_map(move |s| PermutationAction::sample_uniform(k, &mut RngStream::new(s).rng()))
}

fn star_values(k: usize) -> impl Strategy<Value = StarMeasure> {
    let lo = 1.0 / k as f64;
    prop::collection::vec(prop_oneof![Just(lo), Just(1.0), lo..1.0], 1..40)
        .prop_map(move |xs| StarMeasure::from_samples(k, xs).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn log_weights_commute_with_relabelling(logs in prop::collection::vec(-50.0f64..0.0, 3..8), seed in any::<u64>()) {
        let k = logs.len();
        let pi = PermutationAction::sample_uniform(k, &mut RngStream::new(seed).rng());
        let p = SimplexVector::from_log_weights(&logs).unwrap();
        let moved: Vec<f64> = (0..k).map(|l| logs[pi.apply(l)]).collect();
        prop_assert_eq!(SimplexVector::from_log_weights(&moved).unwrap(), pi.act_on(&p));
        prop_assert!((p.0.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn composition_is_associative((a, b, c) in (3usize..9).prop_flat_map(|k| (perm(k), perm(k), perm(k)))) {
        prop_assert_eq!(a.compose(&b).compose(&c), a.compose(&b.compose(&c)));
        prop_assert_eq!(a.compose(&a.inverse()), PermutationAction::identity(a.k()));
    }

    #[test]
    fn nu1_draws_fix_their_colour(k in 3usize..12, l in 0usize..12, seed in any::<u64>()) {
        let l = l % k;
        let pi = PermutationAction::sample_nu1(k, l, &mut RngStream::new(seed).rng());
        prop_assert_eq!(pi.apply(l), l);
    }

    #[test]
    fn mixes_stay_on_the_simplex((f, l) in (3usize..8).prop_flat_map(|k| (simplex(k), 0..k)), p in 0.0f64..=1.0) {
        let g = nu2_mix(&nu1_mix(&f, l), p);
        prop_assert!((g.0.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(g.0.iter().all(|&x| x >= 0.0));
        prop_assert_eq!(nu1_mix(&f, l).0[l], f.0[l]);
    }

    #[test]
    fn reduction_never_raises((src, tgt) in (3usize..7).prop_flat_map(|k| (star_values(k), star_values(k))), u in 0.0f64..=1.0) {
        let k = src.k() as f64;
        let r = QuantileReduction::new(&src, &tgt).unwrap();
        for &y in src.values().points() {
            let q = r.q(y, u);
            prop_assert!(q <= y.max(1.0 / k) && q >= 1.0 / k);
            let p = r.p(y, u);
            prop_assert!((0.0..=1.0).contains(&p));
        }
    }

    #[test]
    fn measure_does_not_fall_below_itself(m in (3usize..6).prop_flat_map(star_values)) {
        prop_assert_eq!(dominance_excess(&m, &m), 0.0);
    }

    #[test]
    fn truncated_poisson_respects_its_cap(mean in 0.0f64..20.0, cap in 0u32..15, seed in any::<u64>()) {
        let law = OffspringLaw::TruncatedPoisson { mean, cap };
        let mut rng = RngStream::new(seed).rng();
        for _ in 0..50 {
            prop_assert!(law.sample_count(&mut rng) <= cap as u64);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bob_reproduces_alice_exactly(k in 3usize..6, depth in 0u32..4, mean in 0.5f64..4.0, theta in 0.0f64..=1.0, seed in any::<u64>()) {
        let law = OffspringLaw::Poisson { mean };
        let frozen = StarMeasure::frozen(k);
        let target = StarMeasure::uniform(k).mix(theta, &frozen).unwrap();
        // Any image works for exactness; only the law of the output depends on it.
        let red = Reductions::from_image(&target, &frozen, 1.0).unwrap();
        let inst = sample_instance(k, &law, depth, None, RngStream::new(seed)).unwrap();
        let out = run_alice(&inst, &red, true).unwrap();
        let board = out.record.unwrap().board;
        let back = BobArray::from_json(&board.to_json().unwrap()).unwrap();
        prop_assert_eq!(back.belief().unwrap(), out.belief.clone());
        let dev = equivariance_check(&board, 5, &mut RngStream::new(seed ^ 1).rng()).unwrap();
        prop_assert_eq!(dev, 0.0);
        prop_assert!((out.belief.0.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
