use fourier_lab::cylinder::CylinderSet;
use fourier_lab::energy::{riesz_energy, verify_energy_dominates_bound};
use fourier_lab::fourier::{batch_integer_transform, sinc, SpectralMeasure};
use fourier_lab::lemma::infsup_lower_bound;
use fourier_lab::measure::DyadicMeasure;
use proptest::prelude::*;

fn measure(max_depth: u32) -> impl Strategy<Value = DyadicMeasure> {
    (1..=max_depth).prop_flat_map(|d| {
        prop::collection::vec(0.0f64..1.0, 1usize << d)
            .prop_filter("some mass", |w| w.iter().sum::<f64>() > 1e-3)
            .prop_map(move |w| DyadicMeasure::from_weights(d, &w).unwrap())
    })
}

fn set_at(depth: u32) -> impl Strategy<Value = CylinderSet> {
    prop::collection::btree_set(0u64..1 << depth, 1..=(1usize << depth))
        .prop_map(move |ix| CylinderSet::from_indices(depth, ix).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pushforward_scales_frequencies(mu in measure(8), l in 0u32..=4, j in 1u64..=32) {
        prop_assume!(l <= mu.depth());
        let nu = mu.dyadic_pushforward(l).unwrap();
        let a = nu.transform(j as f64);
        let b = mu.transform((j << l) as f64);
        prop_assert!((a - b).norm() < 1e-12, "{a} vs {b}");
        prop_assert!((nu.total_mass() - mu.total_mass()).abs() < 1e-12);
    }

    #[test]
    fn refinement_is_invisible(mu in measure(6), extra in 0u32..4, j in 0u64..64) {
        let fine = mu.refine(mu.depth() + extra).unwrap();
        prop_assert!((fine.transform(j as f64) - mu.transform(j as f64)).norm() < 1e-12);
        prop_assert_eq!(fine.total_mass_exact().value(), mu.total_mass_exact().value());
    }

    #[test]
    fn restriction_splits_mass(mu in measure(6), picks in prop::collection::vec(any::<bool>(), 64)) {
        let d = mu.depth();
        let set = CylinderSet::from_indices(d, (0..1u64 << d).filter(|&i| picks[i as usize])).unwrap();
        let mut both = mu.mass_of_exact(&set).unwrap();
        both += mu.mass_of_exact(&set.complement()).unwrap();
        prop_assert!(both.exactly_equals(&mu.total_mass_exact()));
    }

    #[test]
    fn normalized_has_unit_mass(mu in measure(8)) {
        prop_assert!((mu.normalize().unwrap().total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn batch_matches_single(mu in measure(7)) {
        let b = batch_integer_transform(&mu, 200);
        for j in [0u64, 1, 5, 64, 127, 128, 199, 200] {
            prop_assert!((b.values[j as usize] - mu.transform(j as f64)).norm() < 1e-10);
        }
    }

    #[test]
    fn transform_bounded_by_mass(mu in measure(8), xi in -1e4f64..1e4) {
        prop_assert!(mu.transform(xi).norm() <= mu.total_mass() * (1.0 + 1e-12));
    }

    #[test]
    fn energy_dominates_cell_bound(mu in measure(6), set in set_at(4), s in 0.05f64..0.95) {
        let r = verify_energy_dominates_bound(&mu, &set, s).unwrap();
        prop_assert!(r.holds, "{r:?}");
    }

    #[test]
    fn energy_is_quadratic(mu in measure(6), c in 0.1f64..10.0, s in 0.05f64..0.95) {
        let e = riesz_energy(&mu, s).unwrap().value;
        let ec = riesz_energy(&mu.scale(c), s).unwrap().value;
        prop_assert!((ec - c * c * e).abs() <= 1e-10 * ec.abs());
    }

    #[test]
    fn cylinder_counts_are_additive(a in set_at(6), b in set_at(6)) {
        prop_assert_eq!(
            a.union(&b).cell_count() + a.intersection(&b).cell_count(),
            a.cell_count() + b.cell_count()
        );
        prop_assert!(a.difference(&b).is_disjoint_from(&b));
    }

    #[test]
    fn lemma_bound_beats_eps_over_five(eps in 1e-6f64..=1.0) {
        prop_assert!(infsup_lower_bound(eps) >= eps / 5.0);
    }

    #[test]
    fn sinc_bounded(x in -1e3f64..1e3) {
        prop_assert!(sinc(x).abs() <= 1.0);
        prop_assert!(sinc(x) == sinc(-x));
    }
}
