//! Invariants over seeded random inputs.

use cetradeoff::channels::{random_channel, twirl_deviation};
use cetradeoff::functionals::{chi_assist, holevo_chi, Ensemble};
use cetradeoff::qstate::{partial_trace, purify, von_neumann_entropy, SubsystemShape};
use cetradeoff::random;
use cetradeoff::report::curve_csv;
use cetradeoff::spec::ChannelSpec;
use cetradeoff::tradeoff::{analyze, timeshare_flagged, TradeoffCurve};
use proptest::prelude::*;

fn cfg() -> ProptestConfig {
    ProptestConfig { cases: 32, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(cfg())]

    #[test]
    fn entropy_is_bounded_and_additive(d1 in 1usize..5, d2 in 1usize..4, seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let a = random::random_density(d1, &mut rng);
        let b = random::random_density(d2, &mut rng);
        let sa = von_neumann_entropy(&a);
        prop_assert!(sa >= -1e-12 && sa <= (d1 as f64).log2() + 1e-12);
        let joint = von_neumann_entropy(&a.kron(&b));
        prop_assert!((joint - sa - von_neumann_entropy(&b)).abs() < 1e-9);
    }

    #[test]
    fn purification_reduces_to_the_state(d in 1usize..5, seed in any::<u64>()) {
        let rho = random::random_density(d, &mut random::rng(seed));
        let psi = purify(&rho);
        prop_assert!((psi.purity() - 1.0).abs() < 1e-9);
        let back = partial_trace(&psi, &SubsystemShape::new(vec![d, d]).unwrap(), &[0]).unwrap();
        prop_assert!(back.max_abs_diff(&rho) < 1e-10);
    }

    #[test]
    fn channel_outputs_are_states(din in 2usize..4, dout in 2usize..4, env in 2usize..4, seed in any::<u64>()) {
        let ch = random_channel(din, dout, env, seed).unwrap();
        prop_assert!(ch.completeness_deviation() < 1e-10);
        let rho = random::random_density(din, &mut random::rng(seed ^ 1));
        prop_assert!(ch.apply(&rho).is_ok());
    }

    #[test]
    fn holevo_quantity_is_bounded(seed in any::<u64>(), m in 1usize..5) {
        let ch = random_channel(2, 3, 2, seed).unwrap();
        let mut rng = random::rng(seed ^ 2);
        let w = random::dirichlet(m, &mut rng);
        let items: Vec<_> = w.iter().map(|&p| (p, random::haar_pure_state(2, &mut rng))).collect();
        let ens = Ensemble::purified(items).unwrap();
        let chi = holevo_chi(&ch, &ens).unwrap();
        prop_assert!(chi >= -1e-10 && chi <= 3f64.log2() + 1e-10);
        // Pure signals carry no entanglement, so assistance adds nothing.
        prop_assert!((chi_assist(&ch, &ens).unwrap() - chi).abs() < 1e-9);
    }

    #[test]
    fn twirl_maps_to_maximally_mixed(d in 2usize..5, seed in any::<u64>()) {
        let rho = random::random_density(d, &mut random::rng(seed));
        prop_assert!(twirl_deviation(&rho) <= 1e-12);
    }

    #[test]
    fn time_sharing_dominates_the_branch(cn0 in 0.0f64..2.0, a in 0.0f64..1.0, b in 0.0f64..1.0, p in 0.0f64..1.0) {
        let curve = TradeoffCurve::new("q", &[(0.0, a), (0.5, a + 0.5 * b), (1.0, a + 0.75 * b)]).unwrap();
        let shared = timeshare_flagged(cn0, &curve, p).unwrap();
        prop_assert!(shared >= curve.rate_at(p).unwrap() - 1e-12);
        prop_assert!(shared <= cn0.max(a + 0.75 * b) + 1e-12);
    }

    #[test]
    fn concave_curves_have_nonincreasing_slopes(n in 3usize..17, scale in 0.1f64..2.0) {
        let samples: Vec<(f64, f64)> =
            (0..n).map(|i| { let p = i as f64 / (n - 1) as f64; (p, scale * p.sqrt()) }).collect();
        let a = analyze(&TradeoffCurve::new("sqrt", &samples).unwrap(), 0.0).unwrap();
        prop_assert!(a.slopes_nonincreasing);
    }

    #[test]
    fn csv_has_one_row_per_point(n in 1usize..12) {
        let samples: Vec<(f64, f64)> = (0..n).map(|i| (i as f64 * 0.1, 1.0 + i as f64 * 0.05)).collect();
        let csv = curve_csv(&TradeoffCurve::new("c", &samples).unwrap());
        prop_assert!(csv.starts_with("P,rate,provenance_id\n"));
        prop_assert!(!csv.contains('\r'));
        prop_assert_eq!(csv.lines().count(), n + 1);
    }

    #[test]
    fn literal_specs_round_trip(seed in any::<u64>()) {
        let ch = random_channel(2, 3, 2, seed).unwrap();
        let back = ChannelSpec::from_json(&ChannelSpec::literal(&ch).to_json()).unwrap().resolve().unwrap();
        let rho = random::random_density(2, &mut random::rng(seed ^ 3));
        prop_assert!(ch.apply(&rho).unwrap().max_abs_diff(&back.apply(&rho).unwrap()) < 1e-12);
    }
}
