//! Strangeness correlations of the kaon pair measured at two times.
//!
//! The left kaon is measured at `t_l` and the right one at `t_r`. Decoherence
//! acts on the pair only until the first measurement; afterwards the
//! surviving kaon evolves as a single particle under pure QM. That gives
//! probabilities whose interference term is damped by `e^{−λ min(t_l, t_r)}`.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{evolve_1p_analytic, evolve_2p_analytic, KaonParams};
use crate::qmat::{r, tensor, CMatrix, DensityMatrix, Side, C64};

/// Strangeness eigenstates |K⁰⟩ (S = +) and |K̄⁰⟩ (S = −).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strangeness {
    Plus,
    Minus,
}

impl Strangeness {
    pub const ALL: [Strangeness; 2] = [Strangeness::Plus, Strangeness::Minus];

    /// Mass-basis ket under CP invariance:
    /// |K⁰⟩ = (|K_S⟩ + |K_L⟩)/√2, |K̄⁰⟩ = (|K_S⟩ − |K_L⟩)/√2.
    pub fn ket(self) -> [C64; 2] {
        match self {
            Strangeness::Plus => [r(FRAC_1_SQRT_2), r(FRAC_1_SQRT_2)],
            Strangeness::Minus => [r(FRAC_1_SQRT_2), r(-FRAC_1_SQRT_2)],
        }
    }

    pub fn projector(self) -> CMatrix {
        CMatrix::projector(&self.ket()).expect("2-vector")
    }
}

/// A pair of strangeness results with their measurement times (τ_S).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoTimeOutcome {
    pub s_left: Strangeness,
    pub s_right: Strangeness,
    t_l: f64,
    t_r: f64,
}

impl TwoTimeOutcome {
    pub fn new(s_left: Strangeness, s_right: Strangeness, t_l: f64, t_r: f64) -> Result<Self> {
        for t in [t_l, t_r] {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::NegativeTime(t));
            }
        }
        Ok(Self {
            s_left,
            s_right,
            t_l,
            t_r,
        })
    }

    pub fn t_l(&self) -> f64 {
        self.t_l
    }

    pub fn t_r(&self) -> f64 {
        self.t_r
    }

    /// Δt = t_l − t_r.
    pub fn dt(&self) -> f64 {
        self.t_l - self.t_r
    }

    pub fn is_like(&self) -> bool {
        self.s_left == self.s_right
    }

    /// The same event with left and right exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            s_left: self.s_right,
            s_right: self.s_left,
            t_l: self.t_r,
            t_r: self.t_l,
        }
    }
}

fn check_times(t_l: f64, t_r: f64) -> Result<()> {
    for t in [t_l, t_r] {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::NegativeTime(t));
        }
    }
    Ok(())
}

/// `(1/8)[e^{−Γ_S t_l−Γ_L t_r} + e^{−Γ_L t_l−Γ_S t_r} ∓ 2·damping·cos(ΔmΔt)e^{−Γ(t_l+t_r)}]`
/// with − for like and + for unlike strangeness.
fn two_time_probability(o: &TwoTimeOutcome, p: &KaonParams, damping: f64) -> f64 {
    let (tl, tr) = (o.t_l, o.t_r);
    let incoherent =
        (-p.gamma_s() * tl - p.gamma_l() * tr).exp() + (-p.gamma_l() * tl - p.gamma_s() * tr).exp();
    let interference =
        2.0 * damping * (p.delta_m() * o.dt()).cos() * (-p.gamma() * (tl + tr)).exp();
    let sign = if o.is_like() { -1.0 } else { 1.0 };
    0.125 * (incoherent + sign * interference)
}

/// Joint probability of the outcome in the λ model (closed form).
pub fn prob_lambda(outcome: &TwoTimeOutcome, p: &KaonParams) -> f64 {
    let first = outcome.t_l.min(outcome.t_r);
    two_time_probability(outcome, p, (-p.lambda() * first).exp())
}

/// Joint probability obtained by simulating the measurement sequence.
///
/// The pair evolves with decoherence up to the earlier time, the earlier
/// kaon is projected onto its strangeness and traced out, the survivor
/// evolves under pure QM to the later time and is projected in turn.
pub fn prob_lambda_sequential(outcome: &TwoTimeOutcome, p: &KaonParams) -> Result<f64> {
    // (side measured first, its result, survivor's result)
    let (first_side, first_s, second_s) = if outcome.t_r <= outcome.t_l {
        (Side::Right, outcome.s_right, outcome.s_left)
    } else {
        (Side::Left, outcome.s_left, outcome.s_right)
    };
    let t_first = outcome.t_l.min(outcome.t_r);
    let t_second = outcome.t_l.max(outcome.t_r);

    let pair = evolve_2p_analytic(t_first, p)?;
    let id = CMatrix::identity(2)?;
    let measure = match first_side {
        Side::Right => tensor(&id, &first_s.projector())?,
        Side::Left => tensor(&first_s.projector(), &id)?,
    };
    let conditioned = &(&measure * pair.mat()) * &measure;
    let survivor = DensityMatrix::new(conditioned.partial_trace(first_side)?)?;

    let qm = p.with_lambda(0.0)?;
    let later = evolve_1p_analytic(&survivor, t_second - t_first, &qm)?;
    Ok((&second_s.projector() * later.mat()).trace().re)
}

/// Joint probability with the interference term scaled by `(1 − ζ)`.
pub fn prob_zeta(outcome: &TwoTimeOutcome, p: &KaonParams, zeta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&zeta) {
        return Err(Error::InvalidParameter(format!("zeta must lie in [0, 1], got {zeta}")));
    }
    Ok(two_time_probability(outcome, p, 1.0 - zeta))
}

/// Pure-QM asymmetry `cos(ΔmΔt)/cosh(ΔΓΔt/2)`, with Δt multiplied by the
/// parameter set's Δt scale (1 unless overridden).
pub fn asymmetry_qm(dt: f64, p: &KaonParams) -> f64 {
    let dt = dt * p.dt_scale();
    (p.delta_m() * dt).cos() / (0.5 * p.delta_gamma() * dt).cosh()
}

/// λ-model asymmetry `A_QM(Δt)·e^{−λ min(t_l, t_r)}`.
pub fn asymmetry_lambda(t_l: f64, t_r: f64, p: &KaonParams) -> Result<f64> {
    check_times(t_l, t_r)?;
    Ok(asymmetry_qm(t_l - t_r, p) * (-p.lambda() * t_l.min(t_r)).exp())
}

/// (unlike − like)/(unlike + like) summed over both orderings of each.
pub fn asymmetry_from_probabilities(t_l: f64, t_r: f64, p: &KaonParams) -> Result<f64> {
    let mut unlike = 0.0;
    let mut like = 0.0;
    for sl in Strangeness::ALL {
        for sr in Strangeness::ALL {
            let o = TwoTimeOutcome::new(sl, sr, t_l, t_r)?;
            if o.is_like() {
                like += prob_lambda(&o, p);
            } else {
                unlike += prob_lambda(&o, p);
            }
        }
    }
    Ok((unlike - like) / (unlike + like))
}

/// The parameterization family of the effective decoherence parameter ζ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZetaKind {
    /// ζ = 1 − e^{−λ min(t_l, t_r)}: decoherence of the pair until the first measurement.
    TwoParticleMin,
    /// ζ(t) = 1 − e^{−λt} for the unmeasured pair at common time t.
    SingleTime,
    /// ζ = 1 − e^{−λ(t_l + t_r)}: single-particle decoherence carried to the pair.
    OneParticleSum,
    /// Time-independent ζ.
    Constant,
}

impl ZetaKind {
    /// Model of this kind with the given strength (λ, or ζ for [`ZetaKind::Constant`]).
    pub fn with_strength(self, strength: f64) -> Result<ZetaModel> {
        let m = match self {
            ZetaKind::TwoParticleMin => ZetaModel::TwoParticleMin { lambda: strength },
            ZetaKind::SingleTime => ZetaModel::SingleTime { lambda: strength },
            ZetaKind::OneParticleSum => ZetaModel::OneParticleSum { lambda: strength },
            ZetaKind::Constant => ZetaModel::Constant { zeta: strength },
        };
        m.validate()?;
        Ok(m)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ZetaModel {
    TwoParticleMin { lambda: f64 },
    SingleTime { lambda: f64 },
    OneParticleSum { lambda: f64 },
    Constant { zeta: f64 },
}

impl ZetaModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ZetaModel::TwoParticleMin { lambda }
            | ZetaModel::SingleTime { lambda }
            | ZetaModel::OneParticleSum { lambda } => {
                if !(lambda >= 0.0) {
                    return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
                }
            }
            ZetaModel::Constant { zeta } => {
                if !(0.0..=1.0).contains(&zeta) {
                    return Err(Error::InvalidParameter(format!(
                        "zeta must lie in [0, 1], got {zeta}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> ZetaKind {
        match self {
            ZetaModel::TwoParticleMin { .. } => ZetaKind::TwoParticleMin,
            ZetaModel::SingleTime { .. } => ZetaKind::SingleTime,
            ZetaModel::OneParticleSum { .. } => ZetaKind::OneParticleSum,
            ZetaModel::Constant { .. } => ZetaKind::Constant,
        }
    }

    /// λ for the time-dependent kinds, ζ for the constant one.
    pub fn strength(&self) -> f64 {
        match *self {
            ZetaModel::TwoParticleMin { lambda }
            | ZetaModel::SingleTime { lambda }
            | ZetaModel::OneParticleSum { lambda } => lambda,
            ZetaModel::Constant { zeta } => zeta,
        }
    }
}

/// 1 − e^{−λt}, with the t = 0 case pinned to 0 so that λ = ∞ stays finite.
fn decohered_fraction(lambda: f64, t: f64) -> f64 {
    if t == 0.0 || lambda == 0.0 {
        0.0
    } else {
        (-(-lambda * t).exp_m1()).clamp(0.0, 1.0)
    }
}

/// ζ for the given measurement times.
pub fn zeta_eval(model: &ZetaModel, t_l: f64, t_r: f64) -> Result<f64> {
    check_times(t_l, t_r)?;
    model.validate()?;
    Ok(match *model {
        ZetaModel::TwoParticleMin { lambda } => decohered_fraction(lambda, t_l.min(t_r)),
        ZetaModel::SingleTime { lambda } => {
            if t_l != t_r {
                return Err(Error::InvalidParameter(format!(
                    "single-time zeta needs t_l == t_r, got {t_l} and {t_r}"
                )));
            }
            decohered_fraction(lambda, t_l)
        }
        ZetaModel::OneParticleSum { lambda } => decohered_fraction(lambda, t_l + t_r),
        ZetaModel::Constant { zeta } => zeta,
    })
}

/// ζ-model asymmetry `A_QM(Δt)·(1 − ζ(t_l, t_r))`.
pub fn asymmetry_zeta(t_l: f64, t_r: f64, p: &KaonParams, model: &ZetaModel) -> Result<f64> {
    let zeta = zeta_eval(model, t_l, t_r)?;
    Ok(asymmetry_qm(t_l - t_r, p) * (1.0 - zeta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use Strangeness::{Minus, Plus};

    fn params(lambda: f64) -> KaonParams {
        KaonParams::default().with_lambda(lambda).unwrap()
    }

    fn outcome(a: Strangeness, b: Strangeness, tl: f64, tr: f64) -> TwoTimeOutcome {
        TwoTimeOutcome::new(a, b, tl, tr).unwrap()
    }

    #[test]
    fn strangeness_kets_are_orthonormal() {
        let (k, kb) = (Plus.ket(), Minus.ket());
        let dot: C64 = k.iter().zip(&kb).map(|(a, b)| a.conj() * b).sum();
        assert!(dot.norm() < 1e-16);
        let total = &Plus.projector() + &Minus.projector();
        assert!(total.max_abs_diff(&CMatrix::identity(2).unwrap()) < 1e-15);
    }

    #[test]
    fn like_probability_at_equal_times() {
        let p = params(0.25);
        for t in [0.0, 0.55, 2.0] {
            let want = 0.25 * (-2.0 * p.gamma() * t).exp() * (1.0 - (-0.25 * t).exp());
            for s in Strangeness::ALL {
                let got = prob_lambda(&outcome(s, s, t, t), &p);
                assert!((got - want).abs() < 1e-15, "t = {t}: {got} vs {want}");
            }
        }
        let qm = params(0.0);
        assert!(prob_lambda(&outcome(Plus, Plus, 1.3, 1.3), &qm).abs() < 1e-16);
    }

    #[test]
    fn four_outcomes_sum_to_incoherent_part() {
        let p = params(0.59);
        for (tl, tr) in [(0.55, 0.55), (1.925, 0.55), (0.2, 3.1)] {
            let total: f64 = Strangeness::ALL
                .iter()
                .flat_map(|&a| Strangeness::ALL.iter().map(move |&b| (a, b)))
                .map(|(a, b)| prob_lambda(&outcome(a, b, tl, tr), &p))
                .sum();
            // interference cancels; at t = 0 the total is 1
            let want = 0.5
                * ((-p.gamma_s() * tl - p.gamma_l() * tr).exp()
                    + (-p.gamma_l() * tl - p.gamma_s() * tr).exp());
            assert!((total - want).abs() < 1e-15);
        }
    }

    #[test]
    fn equal_strangeness_pairs_agree() {
        let p = params(0.3);
        let (tl, tr) = (1.7, 0.4);
        let pp = prob_lambda(&outcome(Plus, Plus, tl, tr), &p);
        let mm = prob_lambda(&outcome(Minus, Minus, tl, tr), &p);
        let pm = prob_lambda(&outcome(Plus, Minus, tl, tr), &p);
        let mp = prob_lambda(&outcome(Minus, Plus, tl, tr), &p);
        assert_eq!(pp, mm);
        assert_eq!(pm, mp);
    }

    #[test]
    fn sequential_pipeline_matches_closed_form() {
        let p = params(0.25);
        for (tl, tr) in [(0.55, 0.55), (1.925, 0.55), (0.3, 2.2), (0.0, 1.0), (4.0, 0.0)] {
            for a in Strangeness::ALL {
                for b in Strangeness::ALL {
                    let o = outcome(a, b, tl, tr);
                    let seq = prob_lambda_sequential(&o, &p).unwrap();
                    assert!((seq - prob_lambda(&o, &p)).abs() < 1e-10, "{o:?}");
                }
            }
        }
    }

    #[test]
    fn negative_times_rejected() {
        assert!(TwoTimeOutcome::new(Plus, Plus, -0.1, 0.0).is_err());
        assert!(asymmetry_lambda(0.1, -0.1, &params(0.1)).is_err());
    }

    #[test]
    fn zeta_probability_limits() {
        let p = params(0.0);
        let o = outcome(Plus, Plus, 1.2, 0.4);
        assert!((prob_zeta(&o, &p, 0.0).unwrap() - prob_lambda(&o, &p)).abs() < 1e-16);
        let unlike = outcome(Plus, Minus, 1.2, 0.4);
        assert_eq!(prob_zeta(&o, &p, 1.0).unwrap(), prob_zeta(&unlike, &p, 1.0).unwrap());
        assert!(prob_zeta(&o, &p, 1.5).is_err());
        assert!(prob_zeta(&o, &p, -0.01).is_err());
    }

    #[test]
    fn qm_asymmetry_values() {
        let p = params(0.0);
        assert_eq!(asymmetry_qm(0.0, &p), 1.0);
        for dt in [0.3, 1.0, 5.5] {
            assert_eq!(asymmetry_qm(dt, &p), asymmetry_qm(-dt, &p));
        }
        let dt = std::f64::consts::PI / p.delta_m();
        let want = -1.0 / (p.delta_gamma() * std::f64::consts::PI / (2.0 * p.delta_m())).cosh();
        assert!((asymmetry_qm(dt, &p) - want).abs() < 1e-14);
    }

    #[test]
    fn dt_scale_only_touches_qm_asymmetry() {
        let p = params(0.25).with_dt_scale(1.5).unwrap();
        assert!((asymmetry_qm(2.0, &p) - asymmetry_qm(3.0, &params(0.25))).abs() < 1e-15);
        assert!(params(0.0).with_dt_scale(0.0).is_err());
    }

    #[test]
    fn lambda_asymmetry_values() {
        let p = params(0.25);
        let a = asymmetry_lambda(0.55, 0.55, &p).unwrap();
        assert!((a - (-0.1375f64).exp()).abs() < 1e-15);
        assert!((a - 0.8715).abs() < 5e-5);
        for t in [0.1, 1.0, 3.0] {
            assert!((asymmetry_lambda(t, t, &p).unwrap() - (-0.25 * t).exp()).abs() < 1e-15);
        }
        let qm = params(0.0);
        assert_eq!(asymmetry_lambda(1.925, 0.55, &qm).unwrap(), asymmetry_qm(1.375, &qm));
        let ratio = asymmetry_from_probabilities(0.55, 0.55, &p).unwrap();
        assert!((ratio - a).abs() < 1e-12);
    }

    #[test]
    fn zeta_models() {
        let min = ZetaModel::TwoParticleMin { lambda: 0.25 };
        let z = zeta_eval(&min, 1.925, 0.55).unwrap();
        assert!((z - (1.0 - (-0.1375f64).exp())).abs() < 1e-15);
        assert!((z - 0.1285).abs() < 5e-5);

        for kind in [ZetaKind::TwoParticleMin, ZetaKind::SingleTime, ZetaKind::OneParticleSum] {
            let m = kind.with_strength(0.0).unwrap();
            assert_eq!(zeta_eval(&m, 0.7, 0.7).unwrap(), 0.0);
        }
        let huge = ZetaModel::TwoParticleMin { lambda: f64::INFINITY };
        assert_eq!(zeta_eval(&huge, 1.0, 2.0).unwrap(), 1.0);
        assert_eq!(zeta_eval(&huge, 0.0, 2.0).unwrap(), 0.0);
        assert_eq!(zeta_eval(&ZetaModel::TwoParticleMin { lambda: 1e6 }, 1.0, 2.0).unwrap(), 1.0);

        let single = ZetaModel::SingleTime { lambda: 0.25 };
        assert!(zeta_eval(&single, 1.0, 0.5).is_err());
        assert!(ZetaKind::Constant.with_strength(1.2).is_err());
        assert!(ZetaKind::TwoParticleMin.with_strength(-0.2).is_err());
    }

    #[test]
    fn zeta_asymmetries() {
        let p = params(0.25);
        let min = ZetaModel::TwoParticleMin { lambda: 0.25 };
        for (tl, tr) in [(0.55, 0.55), (1.925, 0.55), (0.2, 2.0)] {
            let a = asymmetry_zeta(tl, tr, &p, &min).unwrap();
            assert!((a - asymmetry_lambda(tl, tr, &p).unwrap()).abs() < 1e-15);
        }
        let sum = ZetaModel::OneParticleSum { lambda: 0.25 };
        let a = asymmetry_zeta(0.8, 0.8, &p, &sum).unwrap();
        assert!((a - (-0.4f64).exp()).abs() < 1e-15);
        let constant = ZetaModel::Constant { zeta: 0.13 };
        assert!((asymmetry_zeta(0.55, 0.55, &p, &constant).unwrap() - 0.87).abs() < 1e-15);
    }
}
