mod common;

use proptest::prelude::*;
use quantmerge::gbdt::{
    build_histogram_and_split, fit_quantile_gbdt, fit_quantile_gbdt_logged, gbdt_from_str,
    gbdt_to_string, BinnedMatrix, GbdtConfig, GossConfig,
};
use quantmerge::{Dataset, FeatureMatrix, QuantileLevel};

fn level(t: f64) -> QuantileLevel {
    QuantileLevel::new(t).unwrap()
}

fn toy(n: usize, seed: u64) -> Dataset {
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut s = seed
        .wrapping_mul(6364136223846793005)
        .wrapping_add(1442695040888963407);
    let mut next = || {
        s = s
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (s >> 11) as f64 / (1u64 << 53) as f64
    };
    for _ in 0..n {
        let a = next() * 10.0;
        let b = next() * 4.0;
        let c = next();
        rows.push([a, b, c]);
        let noise = next();
        y.push(if noise < 0.3 {
            0.0
        } else {
            a * 0.5 + b + noise * 5.0 * (1.0 + c)
        });
    }
    Dataset::new(FeatureMatrix::from_rows(&rows).unwrap(), y).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    // dyadic gradients keep every partial sum exact, so the scan and the
    // brute force must agree bit for bit
    #[test]
    fn split_matches_exhaustive_enumeration(
        rows in prop::collection::vec((0u8..6, 0u8..9, 0u8..3, 0u8..2), 2..=64),
        tau in prop::sample::select(vec![0.125, 0.25, 0.5, 0.75, 0.875]),
        min_data in 1usize..6,
        max_bins in prop::sample::select(vec![3usize, 4, 255]),
    ) {
        let x: Vec<[f64; 3]> = rows.iter().map(|r| [f64::from(r.0), f64::from(r.1) * 0.5, f64::from(r.2)]).collect();
        let grad: Vec<f64> = rows.iter().map(|r| if r.3 == 1 { 1.0 - tau } else { -tau }).collect();
        let bins = BinnedMatrix::new(&FeatureMatrix::from_rows(&x).unwrap(), max_bins);
        let idx: Vec<u32> = (0..x.len() as u32).collect();
        let got = build_histogram_and_split(&idx, &grad, None, &bins, min_data).map(|s| (s.feature, s.bin, s.gain));
        prop_assert_eq!(got, common::brute_gbdt_split(&bins, &idx, &grad, min_data));
    }

    #[test]
    fn subset_split_matches_exhaustive_enumeration(
        rows in prop::collection::vec((0u8..10, 0u8..10, 0u8..2), 10..=64),
        keep in prop::collection::vec(any::<bool>(), 64),
    ) {
        let x: Vec<[f64; 2]> = rows.iter().map(|r| [f64::from(r.0), f64::from(r.1)]).collect();
        let grad: Vec<f64> = rows.iter().map(|r| if r.2 == 1 { 0.5 } else { -0.5 }).collect();
        let bins = BinnedMatrix::new(&FeatureMatrix::from_rows(&x).unwrap(), 255);
        let idx: Vec<u32> = (0..x.len() as u32).filter(|&i| keep[i as usize]).collect();
        let got = build_histogram_and_split(&idx, &grad, None, &bins, 2).map(|s| (s.feature, s.bin, s.gain));
        prop_assert_eq!(got, common::brute_gbdt_split(&bins, &idx, &grad, 2));
    }
}

#[test]
fn serialized_model_predicts_bit_identically() {
    let d = toy(600, 1);
    for goss in [
        None,
        Some(GossConfig {
            top_fraction: 0.2,
            rest_fraction: 0.1,
        }),
    ] {
        let c = GbdtConfig {
            num_iterations: 25,
            min_data_in_leaf: 10,
            goss,
            seed: 3,
            ..GbdtConfig::new(level(0.9))
        };
        let m = fit_quantile_gbdt(&d, None, &c).unwrap();
        let text = gbdt_to_string(&m);
        let back = gbdt_from_str(&text).unwrap();
        assert_eq!(gbdt_to_string(&back), text);
        let (a, b) = (m.predict(&d.x).unwrap(), back.predict(&d.x).unwrap());
        assert!(a.iter().zip(&b).all(|(p, q)| p.to_bits() == q.to_bits()));
    }
}

#[test]
fn fitting_is_deterministic() {
    let d = toy(500, 2);
    let c = GbdtConfig {
        num_iterations: 15,
        min_data_in_leaf: 5,
        ..GbdtConfig::new(level(0.5))
    };
    let a = gbdt_to_string(&fit_quantile_gbdt(&d, None, &c).unwrap());
    let b = gbdt_to_string(&fit_quantile_gbdt(&d, None, &c).unwrap());
    assert_eq!(a, b);
}

#[test]
fn training_loss_does_not_increase() {
    let d = toy(800, 3);
    let v = toy(300, 4);
    let c = GbdtConfig {
        num_iterations: 40,
        min_data_in_leaf: 10,
        ..GbdtConfig::new(level(0.75))
    };
    let (_, log) = fit_quantile_gbdt_logged(&d, Some(&v), &c).unwrap();
    assert_eq!(log.train_scores.len(), 41);
    for w in log.train_scores.windows(2) {
        assert!(w[1] <= w[0] + 1e-9, "{} -> {}", w[0], w[1]);
    }
}

#[test]
fn coverage_tracks_level_on_training_data() {
    let d = toy(2000, 5);
    for tau in [0.1, 0.5, 0.9] {
        let c = GbdtConfig {
            num_iterations: 60,
            min_data_in_leaf: 30,
            ..GbdtConfig::new(level(tau))
        };
        let p = fit_quantile_gbdt(&d, None, &c)
            .unwrap()
            .predict(&d.x)
            .unwrap();
        let cov = p.iter().zip(&d.y).filter(|(p, y)| y <= p).count() as f64 / d.len() as f64;
        assert!(
            (cov - tau).abs() < 0.08 || (tau < 0.3 && cov >= tau),
            "tau {tau} coverage {cov}"
        );
    }
}

#[test]
fn early_stopping_needs_validation_set() {
    let d = toy(100, 6);
    let c = GbdtConfig {
        early_stopping_round: 5,
        ..GbdtConfig::new(level(0.5))
    };
    assert!(fit_quantile_gbdt(&d, None, &c).is_err());
    let m = fit_quantile_gbdt(&d, Some(&toy(100, 7)), &c).unwrap();
    assert!(m.best_iteration <= c.num_iterations);
    assert_eq!(m.used_trees().len(), m.best_iteration);
}
