use std::collections::HashSet;

use annotune_core::eval::relative_error;
use annotune_core::{Configuration, ParamDef, ParamSpace, ValidityRule};
use proptest::prelude::*;

fn space_strategy() -> impl Strategy<Value = ParamSpace> {
    prop::collection::vec(prop::collection::btree_set(-50i64..50, 1..6), 1..5).prop_map(|sets| {
        let params =
            sets.into_iter().enumerate().map(|(i, s)| ParamDef::new(format!("p{i}"), s.into_iter().collect::<Vec<_>>())).collect();
        ParamSpace::new("random", params, vec![]).unwrap()
    })
}

proptest! {
    #[test]
    fn index_round_trips(space in space_strategy(), raw in any::<u64>()) {
        let index = raw % space.cardinality();
        let config = space.config_at_index(index).unwrap();
        prop_assert_eq!(space.index_of_config(&config).unwrap(), index);
    }

    #[test]
    fn samples_are_distinct_and_in_range(space in space_strategy(), frac in 0.0f64..=1.0, seed in any::<u64>()) {
        let n = (space.cardinality() as f64 * frac) as u64;
        let indices = space.sample_indices(n, seed).unwrap();
        prop_assert_eq!(indices.len() as u64, n);
        let distinct: HashSet<u64> = indices.iter().copied().collect();
        prop_assert_eq!(distinct.len() as u64, n);
        prop_assert!(indices.iter().all(|&i| i < space.cardinality()));
    }

    #[test]
    fn max_product_is_monotone(a in 1usize..8, b in 1usize..8, da in 0usize..8, db in 0usize..8, bound in 1i64..20000) {
        let values: Vec<i64> = (0..8).map(|i| 1 << i).collect();
        let space = ParamSpace::new(
            "mono",
            vec![ParamDef::new("x", values.clone()), ParamDef::new("y", values.clone())],
            vec![ValidityRule::max_product(&["x", "y"], bound)],
        )
        .unwrap();
        let big = Configuration::new([values[a], values[b]]);
        let small = Configuration::new([values[a.saturating_sub(da)], values[b.saturating_sub(db)]]);
        if space.is_statically_valid(&big) {
            prop_assert!(space.is_statically_valid(&small));
        }
        prop_assert_eq!(space.is_statically_valid(&big), values[a] * values[b] <= bound);
    }

    #[test]
    fn log_distance_bounds_ratio(a in 1e-9f64..1e3, b in 1e-9f64..1e3, eps in 0.0f64..5.0) {
        if (a.ln() - b.ln()).abs() <= eps {
            prop_assert!((a / b).max(b / a) <= eps.exp() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn relative_error_is_scale_invariant(
        pairs in prop::collection::vec((1e-6f64..1e3, 1e-6f64..1e3), 1..50),
        scale in 1e-3f64..1e3,
    ) {
        let base = relative_error(pairs.iter().copied()).unwrap();
        let scaled = relative_error(pairs.iter().map(|&(p, a)| (p * scale, a * scale))).unwrap();
        prop_assert!((base - scaled).abs() <= 1e-9 * base.max(1.0));
    }
}

#[test]
fn sampling_is_roughly_uniform() {
    let space = ParamSpace::new("u", vec![ParamDef::new("x", (0..20).collect::<Vec<i64>>())], vec![]).unwrap();
    let mut counts = [0u32; 20];
    let trials = 4000;
    for seed in 0..trials {
        for i in space.sample_indices(5, seed).unwrap() {
            counts[i as usize] += 1;
        }
    }
    // Each index is drawn with probability 1/4 per trial.
    let expected = f64::from(trials as u32) * 5.0 / 20.0;
    let chi2: f64 = counts.iter().map(|&c| (f64::from(c) - expected).powi(2) / expected).sum();
    // 19 degrees of freedom; the 99.9th percentile is about 43.8.
    assert!(chi2 < 43.8, "chi-square {chi2} for counts {counts:?}");
}
