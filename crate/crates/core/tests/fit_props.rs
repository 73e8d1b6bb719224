mod common;

use common::params;
use kaon_decoherence::fit::{
    average_configs, chi2, fit_lambda, synth_dataset, synth_dataset_with_rng, trial_rng,
    AsymmetryDataset, FitOptions,
};
use kaon_decoherence::observables::{ZetaKind, ZetaModel};
use proptest::prelude::*;

fn equal_times(n: usize, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .map(|t| (t, t))
        .collect()
}

fn mixed_times() -> Vec<(f64, f64)> {
    let mut v = Vec::new();
    for i in 0..10 {
        let t = 0.2 + 0.2 * i as f64;
        v.push((t, t));
        v.push((t + 1.0, t));
    }
    v
}

#[test]
fn chi2_convex_near_minimum() {
    let p = params(0.0);
    for truth in [0.1, 0.25, 0.59] {
        let ds = synth_dataset(&p, &ZetaModel::TwoParticleMin { lambda: truth }, &mixed_times(), 0.02, 3)
            .unwrap();
        let f = |l: f64| chi2(&ds, &p, &ZetaModel::TwoParticleMin { lambda: l }).unwrap();
        let h = 0.01;
        for k in -4..=10 {
            let l = truth + 0.02 * k as f64;
            let second = f(l + h) - 2.0 * f(l) + f(l - h);
            assert!(second > 0.0, "truth {truth}, lambda {l}");
        }
    }
}

#[test]
fn sum_model_fits_min_data_worse() {
    let p = params(0.0);
    let ds = synth_dataset(&p, &ZetaModel::TwoParticleMin { lambda: 0.25 }, &mixed_times(), 0.0, 1)
        .unwrap();
    let opts = FitOptions::default();
    let min = fit_lambda(&ds, &p, ZetaKind::TwoParticleMin, &opts).unwrap();
    let sum = fit_lambda(&ds, &p, ZetaKind::OneParticleSum, &opts).unwrap();
    assert!((min.lambda_hat - 0.25).abs() < 1e-6);
    assert!(sum.chi2_min > min.chi2_min + 1e-6);
}

#[test]
fn interval_brackets_estimate() {
    let p = params(0.0);
    let ds = synth_dataset(&p, &ZetaModel::TwoParticleMin { lambda: 0.3 }, &equal_times(40, 0.1, 3.0), 0.02, 17)
        .unwrap();
    let fit = fit_lambda(&ds, &p, ZetaKind::TwoParticleMin, &FitOptions::default()).unwrap();
    assert!(fit.lambda_err_lo < fit.lambda_hat && fit.lambda_hat < fit.lambda_err_hi);
    assert!(fit.interval_bracketed && !fit.boundary);
    let model = ZetaModel::TwoParticleMin { lambda: fit.lambda_hat };
    let at = |l: f64| chi2(&ds, &p, &ZetaModel::TwoParticleMin { lambda: l }).unwrap();
    assert!((chi2(&ds, &p, &model).unwrap() - fit.chi2_min).abs() < 1e-12);
    assert!((at(fit.lambda_err_lo) - fit.chi2_min - 1.0).abs() < 1e-6);
    assert!((at(fit.lambda_err_hi) - fit.chi2_min - 1.0).abs() < 1e-6);
}

#[test]
fn trials_use_distinct_streams() {
    let p = params(0.0);
    let grid = equal_times(5, 0.1, 1.0);
    let model = ZetaModel::TwoParticleMin { lambda: 0.25 };
    let draw = |trial| {
        synth_dataset_with_rng(&p, &model, &grid, 0.02, 0.02, &mut trial_rng(42, trial)).unwrap()
    };
    assert_eq!(draw(3), draw(3));
    assert_ne!(draw(3), draw(4));
}

#[test]
fn empty_dataset_is_rejected() {
    let ds = AsymmetryDataset::new(vec![], "none").unwrap();
    assert!(fit_lambda(&ds, &params(0.0), ZetaKind::TwoParticleMin, &FitOptions::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn noiseless_round_trip(truth in 0.0..2.0f64) {
        let p = params(0.0);
        let ds = synth_dataset(&p, &ZetaModel::TwoParticleMin { lambda: truth }, &equal_times(20, 0.1, 3.0), 0.0, 1)
            .unwrap();
        let fit = fit_lambda(&ds, &p, ZetaKind::TwoParticleMin, &FitOptions::default()).unwrap();
        prop_assert!((fit.lambda_hat - truth).abs() < 1e-6);
    }

    #[test]
    fn averaging_is_permutation_invariant(seeds in prop::collection::vec(0u64..1000, 2..5)) {
        let p = params(0.0);
        let grid = equal_times(10, 0.2, 2.0);
        let model = ZetaModel::TwoParticleMin { lambda: 0.4 };
        let fits: Vec<_> = seeds
            .iter()
            .map(|&s| {
                let ds = synth_dataset(&p, &model, &grid, 0.05, s).unwrap();
                fit_lambda(&ds, &p, ZetaKind::TwoParticleMin, &FitOptions::default()).unwrap()
            })
            .collect();
        let mut reversed = fits.clone();
        reversed.reverse();
        let a = average_configs(&fits).unwrap();
        let b = average_configs(&reversed).unwrap();
        prop_assert_eq!(a.lambda_hat, b.lambda_hat);
        prop_assert_eq!(a.lambda_err_lo, b.lambda_err_lo);
        prop_assert_eq!(a.zeta_hat, b.zeta_hat);
        prop_assert_eq!(&average_configs(&fits[..1]).unwrap(), &fits[0]);
    }
}
