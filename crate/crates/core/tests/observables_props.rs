mod common;

use common::params;
use kaon_decoherence::observables::{
    asymmetry_from_probabilities, asymmetry_lambda, asymmetry_qm, asymmetry_zeta, prob_lambda,
    prob_lambda_sequential, prob_zeta, zeta_eval, Strangeness, TwoTimeOutcome, ZetaModel,
};
use proptest::prelude::*;

fn outcomes(t_l: f64, t_r: f64) -> Vec<TwoTimeOutcome> {
    let mut v = Vec::new();
    for sl in Strangeness::ALL {
        for sr in Strangeness::ALL {
            v.push(TwoTimeOutcome::new(sl, sr, t_l, t_r).unwrap());
        }
    }
    v
}

proptest! {
    #[test]
    fn asymmetry_ratio_identity(t_l in 0.0..5.0f64, t_r in 0.0..5.0f64, lambda in 0.0..3.0f64) {
        let p = params(lambda);
        let a = asymmetry_from_probabilities(t_l, t_r, &p).unwrap();
        prop_assert!((a - asymmetry_lambda(t_l, t_r, &p).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn zeta_model_reproduces_lambda_model(t_l in 0.0..5.0f64, t_r in 0.0..5.0f64, lambda in 0.0..3.0f64) {
        let p = params(lambda);
        let zeta = zeta_eval(&ZetaModel::TwoParticleMin { lambda }, t_l, t_r).unwrap();
        for o in outcomes(t_l, t_r) {
            prop_assert!((prob_zeta(&o, &p, zeta).unwrap() - prob_lambda(&o, &p)).abs() <= 1e-12);
        }
    }

    #[test]
    fn probabilities_bounded_and_sum(t_l in 0.0..8.0f64, t_r in 0.0..8.0f64, lambda in 0.0..3.0f64) {
        let p = params(lambda);
        let mut total = 0.0;
        for o in outcomes(t_l, t_r) {
            let q = prob_lambda(&o, &p);
            prop_assert!((0.0..=1.0).contains(&q));
            total += q;
        }
        let incoherent = (-p.gamma_s() * t_l - p.gamma_l() * t_r).exp()
            + (-p.gamma_l() * t_l - p.gamma_s() * t_r).exp();
        prop_assert!((total - 0.5 * incoherent).abs() <= 1e-14);
        prop_assert!(total <= 1.0 + 1e-15);
    }

    #[test]
    fn swap_symmetry(t_l in 0.0..5.0f64, t_r in 0.0..5.0f64, lambda in 0.0..3.0f64) {
        let p = params(lambda);
        for o in outcomes(t_l, t_r) {
            prop_assert!((prob_lambda(&o, &p) - prob_lambda(&o.swapped(), &p)).abs() <= 1e-15);
        }
    }

    #[test]
    fn sequential_measurement_matches_closed_form(t_l in 0.0..4.0f64, t_r in 0.0..4.0f64, lambda in 0.0..2.0f64) {
        let p = params(lambda);
        for o in outcomes(t_l, t_r) {
            let seq = prob_lambda_sequential(&o, &p).unwrap();
            prop_assert!((seq - prob_lambda(&o, &p)).abs() <= 1e-10);
        }
    }

    #[test]
    fn constant_zeta_scales_qm(dt in -5.0..5.0f64, zeta in 0.0..1.0f64) {
        let p = params(0.0);
        let (t_l, t_r) = if dt >= 0.0 { (0.55 + dt, 0.55) } else { (0.55, 0.55 - dt) };
        let a = asymmetry_zeta(t_l, t_r, &p, &ZetaModel::Constant { zeta }).unwrap();
        prop_assert!((a - (1.0 - zeta) * asymmetry_qm(dt, &p)).abs() <= 1e-15);
    }
}

#[test]
fn pure_qm_limits() {
    let p = params(0.0);
    assert_eq!(asymmetry_qm(0.0, &p), 1.0);
    // perfect anticorrelation at equal times: like-strangeness vanishes
    for t in [0.0, 0.55, 2.0] {
        for o in outcomes(t, t) {
            if o.is_like() {
                assert!(prob_lambda(&o, &p).abs() < 1e-16);
            }
        }
    }
    let p = params(0.25);
    for i in 0..20 {
        let t = 0.1 * i as f64;
        assert!((asymmetry_lambda(t, t, &p).unwrap() - (-0.25 * t).exp()).abs() < 1e-15);
    }
}
