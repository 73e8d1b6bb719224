//! Time evolution of one- and two-kaon density matrices.
//!
//! The master equation is
//!
//! ```text
//! dρ/dt = −iHρ + iρH† − D[ρ],   D[ρ] = (λ/2) Σ_j [P_j, [P_j, ρ]]
//! ```
//!
//! with `H` the non-Hermitian effective mass Hamiltonian and `P_j` the
//! projectors onto its eigenstates. Under CP invariance the equation
//! decouples entry by entry, which gives the closed forms
//! [`evolve_1p_analytic`] and [`evolve_2p_analytic`]. [`evolve_numeric`]
//! integrates the same equation with classical RK4 and serves as an
//! independent check on both.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::constants::Constants;
use crate::error::{Error, Result};
use crate::qmat::{c, r, tensor, CMatrix, DensityMatrix, QuasispinBasis, C64, HERMITIAN_TOL};

/// Default RK4 step in units of τ_S.
pub const DEFAULT_RK4_STEP: f64 = 1e-3;

/// Traces below this are treated as a fully decayed state.
pub const DECAYED_TRACE: f64 = 1e-300;

/// Kaon parameters in units of Γ_S (times in τ_S).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KaonParams {
    gamma_s: f64,
    gamma_l: f64,
    delta_m: f64,
    lambda: f64,
    dt_scale: f64,
}

impl KaonParams {
    pub fn new(gamma_s: f64, gamma_l: f64, delta_m: f64, lambda: f64) -> Result<Self> {
        if !(gamma_s.is_finite() && gamma_s > 0.0) {
            return Err(Error::InvalidParameter(format!("gamma_S must be > 0, got {gamma_s}")));
        }
        if !(gamma_l.is_finite() && gamma_l >= 0.0) {
            return Err(Error::InvalidParameter(format!("gamma_L must be >= 0, got {gamma_l}")));
        }
        if !delta_m.is_finite() {
            return Err(Error::InvalidParameter(format!("delta_m must be finite, got {delta_m}")));
        }
        Self {
            gamma_s,
            gamma_l,
            delta_m,
            lambda: 0.0,
            dt_scale: 1.0,
        }
        .with_lambda(lambda)
    }

    /// Γ_S = 1 with Γ_L and Δm taken from `constants`.
    pub fn from_constants(constants: &Constants, lambda: f64) -> Result<Self> {
        Self::new(
            1.0,
            constants.gamma_l_over_gamma_s,
            constants.delta_m_over_gamma_s,
            lambda,
        )
    }

    /// Same parameters with a different decoherence strength.
    pub fn with_lambda(self, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
        }
        Ok(Self { lambda, ..self })
    }

    /// Scale applied to Δt inside the QM asymmetry only. Defaults to 1.
    pub fn with_dt_scale(self, dt_scale: f64) -> Result<Self> {
        if !(dt_scale.is_finite() && dt_scale > 0.0) {
            return Err(Error::InvalidParameter(format!("dt scale must be > 0, got {dt_scale}")));
        }
        Ok(Self { dt_scale, ..self })
    }

    pub fn gamma_s(&self) -> f64 {
        self.gamma_s
    }

    pub fn gamma_l(&self) -> f64 {
        self.gamma_l
    }

    pub fn delta_m(&self) -> f64 {
        self.delta_m
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn dt_scale(&self) -> f64 {
        self.dt_scale
    }

    /// Γ = (Γ_S + Γ_L)/2.
    pub fn gamma(&self) -> f64 {
        0.5 * (self.gamma_s + self.gamma_l)
    }

    /// ΔΓ = Γ_L − Γ_S.
    pub fn delta_gamma(&self) -> f64 {
        self.gamma_l - self.gamma_s
    }
}

impl Default for KaonParams {
    fn default() -> Self {
        Self::from_constants(&Constants::default(), 0.0).expect("bundled constants are valid")
    }
}

/// Effective mass Hamiltonian in the mass basis.
///
/// The common mass m_S is dropped, so a single kaon has
/// `H = diag(−iΓ_S/2, Δm − iΓ_L/2)` and a pair has `H_l ⊗ 1 + 1 ⊗ H_r`.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveHamiltonian {
    mat: CMatrix,
}

impl EffectiveHamiltonian {
    pub fn single_particle(p: &KaonParams) -> Self {
        let mat = CMatrix::from_diag(&[c(0.0, -0.5 * p.gamma_s), c(p.delta_m, -0.5 * p.gamma_l)])
            .expect("2x2 diagonal");
        Self { mat }
    }

    pub fn two_particle(p: &KaonParams) -> Self {
        let h = Self::single_particle(p).mat;
        let id = CMatrix::identity(2).expect("2x2 identity");
        let mat = &tensor(&h, &id).expect("2x2 factors") + &tensor(&id, &h).expect("2x2 factors");
        Self { mat }
    }

    /// Any 2x2 or 4x4 generator, e.g. a Hermitian one for unitary checks.
    pub fn from_matrix(mat: CMatrix) -> Self {
        Self { mat }
    }

    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn commutes_with(&self, op: &CMatrix) -> bool {
        self.mat.commutator(op).entries().iter().all(|z| z.norm() <= HERMITIAN_TOL)
    }
}

/// Lindblad generators `A_j = √λ P_j` built from Hermitian projectors.
#[derive(Clone, Debug, PartialEq)]
pub struct LindbladOperatorSet {
    lambda: f64,
    projectors: Vec<CMatrix>,
}

impl LindbladOperatorSet {
    pub fn new(lambda: f64, projectors: Vec<CMatrix>) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
        }
        let dim = projectors.first().map(CMatrix::dim);
        for p in &projectors {
            if Some(p.dim()) != dim {
                return Err(Error::Dimension {
                    expected: dim.unwrap_or(0),
                    got: p.dim(),
                });
            }
            let herm = p.hermiticity_error();
            if herm > HERMITIAN_TOL {
                return Err(Error::NotHermitian(herm));
            }
            if (p * p).max_abs_diff(p) > HERMITIAN_TOL {
                return Err(Error::InvalidParameter("Lindblad projector is not idempotent".into()));
            }
        }
        Ok(Self { lambda, projectors })
    }

    /// Projectors onto K_S and K_L.
    pub fn single_particle(lambda: f64) -> Result<Self> {
        let q = QuasispinBasis::new();
        Self::new(lambda, vec![q.up, q.down])
    }

    /// Projectors onto |e₁⟩ = |K_S K_L⟩ and |e₂⟩ = |K_L K_S⟩.
    pub fn two_particle(lambda: f64) -> Result<Self> {
        Self::new(lambda, vec![CMatrix::projector(&e1())?, CMatrix::projector(&e2())?])
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    pub fn dim(&self) -> Option<usize> {
        self.projectors.first().map(CMatrix::dim)
    }

    /// The generators `A_j = √λ P_j`.
    pub fn operators(&self) -> Vec<CMatrix> {
        let k = self.lambda.sqrt();
        self.projectors.iter().map(|p| p.scale_re(k)).collect()
    }

    /// D[ρ] = (λ/2) Σ_j [P_j, [P_j, ρ]].
    pub fn dissipator(&self, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(rho.dim()).expect("valid dimension");
        for p in &self.projectors {
            out = &out + &p.commutator(&p.commutator(rho));
        }
        out.scale_re(0.5 * self.lambda)
    }
}

/// |e₁⟩ = |K_S⟩_l ⊗ |K_L⟩_r.
pub fn e1() -> [C64; 4] {
    [r(0.0), r(1.0), r(0.0), r(0.0)]
}

/// |e₂⟩ = |K_L⟩_l ⊗ |K_S⟩_r.
pub fn e2() -> [C64; 4] {
    [r(0.0), r(0.0), r(1.0), r(0.0)]
}

/// The quasispin singlet |ψ⁻⟩⟨ψ⁻| with |ψ⁻⟩ = (|e₁⟩ − |e₂⟩)/√2.
pub fn singlet_state() -> DensityMatrix {
    let psi = [r(0.0), r(FRAC_1_SQRT_2), r(-FRAC_1_SQRT_2), r(0.0)];
    let mut m = CMatrix::projector(&psi).expect("4-vector");
    // exact halves instead of (1/√2)² round-off
    for (i, j) in [(1, 1), (2, 2), (1, 2), (2, 1)] {
        m[(i, j)] = r(if i == j { 0.5 } else { -0.5 });
    }
    DensityMatrix::new(m).expect("singlet is a valid state")
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::NegativeTime(t))
    }
}

/// Closed-form single-kaon evolution; the result is not renormalized.
pub fn evolve_1p_analytic(rho0: &DensityMatrix, t: f64, p: &KaonParams) -> Result<DensityMatrix> {
    check_time(t)?;
    rho0.require_dim(2)?;
    let m0 = rho0.mat();
    let mut m = m0.clone();
    m[(0, 0)] = m0[(0, 0)] * (-p.gamma_s * t).exp();
    m[(1, 1)] = m0[(1, 1)] * (-p.gamma_l * t).exp();
    let coherence = (c(-(p.gamma() + p.lambda) * t, -p.delta_m * t)).exp();
    m[(1, 0)] = m0[(1, 0)] * coherence;
    m[(0, 1)] = m[(1, 0)].conj();
    DensityMatrix::new(m)
}

/// Closed-form evolution of the singlet pair; the result is not renormalized.
///
/// `ρ(t) = ½ e^{−2Γt} [ |e₁⟩⟨e₁| + |e₂⟩⟨e₂| − e^{−λt}(|e₁⟩⟨e₂| + |e₂⟩⟨e₁|) ]`
pub fn evolve_2p_analytic(t: f64, p: &KaonParams) -> Result<DensityMatrix> {
    check_time(t)?;
    let decay = 0.5 * (-2.0 * p.gamma() * t).exp();
    let coherence = -decay * (-p.lambda * t).exp();
    let mut m = CMatrix::zeros(4)?;
    m[(1, 1)] = r(decay);
    m[(2, 2)] = r(decay);
    m[(1, 2)] = r(coherence);
    m[(2, 1)] = r(coherence);
    DensityMatrix::new(m)
}

/// Right-hand side of the master equation assembled as `Z + Z†` with
/// `Z = −iHρ − ½Kρ + ½ Σ A ρ A†` and `K = Σ A†A`, so that a Hermitian ρ
/// yields an exactly Hermitian derivative.
struct MasterEquation {
    h: CMatrix,
    k: CMatrix,
    ops: Vec<CMatrix>,
}

impl MasterEquation {
    fn new(h: &EffectiveHamiltonian, ops: &LindbladOperatorSet) -> Result<Self> {
        let dim = h.dim();
        if let Some(d) = ops.dim() {
            if d != dim {
                return Err(Error::Dimension { expected: dim, got: d });
            }
        }
        let ops = ops.operators();
        let mut k = CMatrix::zeros(dim)?;
        for a in &ops {
            k = &k + &(&a.adjoint() * a);
        }
        Ok(Self {
            h: h.mat().clone(),
            k,
            ops,
        })
    }

    fn rhs(&self, rho: &CMatrix) -> CMatrix {
        let mut z = &(&self.h * rho).scale(c(0.0, -1.0)) - &(&self.k * rho).scale_re(0.5);
        for a in &self.ops {
            z = &z + &(&(a * rho) * &a.adjoint()).scale_re(0.5);
        }
        &z + &z.adjoint()
    }

    fn rk4_step(&self, rho: &CMatrix, h: f64) -> CMatrix {
        let k1 = self.rhs(rho);
        let k2 = self.rhs(&(rho + &k1.scale_re(0.5 * h)));
        let k3 = self.rhs(&(rho + &k2.scale_re(0.5 * h)));
        let k4 = self.rhs(&(rho + &k3.scale_re(h)));
        let sum = &(&k1 + &k2.scale_re(2.0)) + &(&k3.scale_re(2.0) + &k4);
        rho + &sum.scale_re(h / 6.0)
    }

    /// Advances by `duration` using equal steps no longer than `step`.
    fn advance(&self, rho: &CMatrix, duration: f64, step: f64) -> CMatrix {
        if duration == 0.0 {
            return rho.clone();
        }
        let n = (duration / step).ceil().max(1.0) as usize;
        let h = duration / n as f64;
        (0..n).fold(rho.clone(), |acc, _| self.rk4_step(&acc, h))
    }
}

fn check_step(step: f64) -> Result<()> {
    if step > 0.0 && step.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("integration step must be > 0, got {step}")))
    }
}

/// Fixed-step classical RK4 integration of the master equation up to `t`.
///
/// The step is shrunk slightly if needed so that an integer number of steps
/// lands exactly on `t`.
pub fn evolve_numeric(
    rho0: &DensityMatrix,
    h: &EffectiveHamiltonian,
    ops: &LindbladOperatorSet,
    t: f64,
    step: f64,
) -> Result<DensityMatrix> {
    check_time(t)?;
    check_step(step)?;
    rho0.require_dim(h.dim())?;
    let eq = MasterEquation::new(h, ops)?;
    DensityMatrix::new(eq.advance(rho0.mat(), t, step))
}

/// Integrates along a sorted time grid, returning the state at each point.
pub fn evolve_numeric_grid(
    rho0: &DensityMatrix,
    h: &EffectiveHamiltonian,
    ops: &LindbladOperatorSet,
    times: &[f64],
    step: f64,
) -> Result<Vec<DensityMatrix>> {
    check_step(step)?;
    rho0.require_dim(h.dim())?;
    let eq = MasterEquation::new(h, ops)?;
    let mut out = Vec::with_capacity(times.len());
    let mut current = rho0.mat().clone();
    let mut now = 0.0;
    for &t in times {
        check_time(t)?;
        if t < now {
            return Err(Error::InvalidParameter("time grid must be sorted".into()));
        }
        current = eq.advance(&current, t - now, step);
        now = t;
        out.push(DensityMatrix::new(current.clone())?);
    }
    Ok(out)
}

/// ρ_N = ρ / Tr ρ, compensating the decay of the non-Hermitian evolution.
pub fn normalize(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let tr = rho.trace();
    if !(tr > DECAYED_TRACE) {
        return Err(Error::FullyDecayed(tr));
    }
    Ok(DensityMatrix::with_flag(rho.mat().scale_re(1.0 / tr), true))
}

/// Normalized two-particle state ρ_N(t).
pub fn normalized_2p(t: f64, p: &KaonParams) -> Result<DensityMatrix> {
    normalize(&evolve_2p_analytic(t, p)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{herm_eigvals, partial_trace, Side};

    fn params(lambda: f64) -> KaonParams {
        KaonParams::default().with_lambda(lambda).unwrap()
    }

    fn sample_1p() -> DensityMatrix {
        let m = CMatrix::from_rows([[r(0.6), c(0.2, -0.35)], [c(0.2, 0.35), r(0.4)]]).unwrap();
        DensityMatrix::new(m).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(KaonParams::new(0.0, 0.0, 0.5, 0.0).is_err());
        assert!(KaonParams::new(1.0, -1.0, 0.5, 0.0).is_err());
        assert!(KaonParams::new(1.0, 0.0, 0.5, -0.1).is_err());
        assert!(KaonParams::new(1.0, 0.0, 0.5, f64::NAN).is_err());
        let p = KaonParams::new(1.0, 0.002, 0.47, 0.25).unwrap();
        assert!((p.gamma() - 0.501).abs() < 1e-15);
        assert!((p.delta_gamma() + 0.998).abs() < 1e-15);
    }

    #[test]
    fn singlet_matrix_form() {
        let rho = singlet_state();
        let want = CMatrix::from_real_rows([
            [0.0, 0.0, 0.0, 0.0],
            [0.0, 0.5, -0.5, 0.0],
            [0.0, -0.5, 0.5, 0.0],
            [0.0, 0.0, 0.0, 0.0],
        ])
        .unwrap();
        assert_eq!(rho.mat(), &want);
        assert_eq!(&(rho.mat() * rho.mat()), rho.mat());
        assert!(rho.is_normalized());
        let vals = herm_eigvals(rho.mat()).unwrap();
        for (v, w) in vals.iter().zip([1.0, 0.0, 0.0, 0.0]) {
            assert!((v - w).abs() < 1e-15);
        }
        let reduced = partial_trace(&rho, Side::Left).unwrap();
        assert!(reduced.mat().max_abs_diff(&CMatrix::identity(2).unwrap().scale_re(0.5)) < 1e-15);
    }

    #[test]
    fn hamiltonian_is_diagonal_and_commutes_with_projectors() {
        let p = params(0.25);
        let h1 = EffectiveHamiltonian::single_particle(&p);
        assert_eq!(h1.mat()[(0, 1)], r(0.0));
        assert_eq!(h1.mat()[(1, 0)], r(0.0));
        assert_eq!(h1.mat()[(1, 1)], c(p.delta_m(), -0.5 * p.gamma_l()));
        for proj in LindbladOperatorSet::single_particle(0.25).unwrap().projectors() {
            assert!(h1.commutes_with(proj));
        }
        let h2 = EffectiveHamiltonian::two_particle(&p);
        for proj in LindbladOperatorSet::two_particle(0.25).unwrap().projectors() {
            assert!(h2.commutes_with(proj));
        }
        // both |e₁⟩ and |e₂⟩ carry the eigenvalue Δm − iΓ
        assert!((h2.mat()[(1, 1)] - c(p.delta_m(), -p.gamma())).norm() < 1e-15);
        assert_eq!(h2.mat()[(1, 1)], h2.mat()[(2, 2)]);
    }

    #[test]
    fn lindblad_operators_are_hermitian_projectors() {
        let ops = LindbladOperatorSet::two_particle(0.59).unwrap();
        for a in ops.operators() {
            assert!(a.hermiticity_error() == 0.0);
        }
        let bad = CMatrix::identity(2).unwrap().scale_re(2.0);
        assert!(LindbladOperatorSet::new(1.0, vec![bad]).is_err());
        let q = QuasispinBasis::new();
        assert!(LindbladOperatorSet::new(1.0, vec![q.plus]).is_err());
    }

    #[test]
    fn dissipator_matches_lindblad_form() {
        // ½ Σ (A†Aρ + ρA†A − 2AρA†) with A = √λ P
        let ops = LindbladOperatorSet::single_particle(0.7).unwrap();
        let rho = sample_1p();
        let mut lindblad = CMatrix::zeros(2).unwrap();
        for a in ops.operators() {
            let ad = a.adjoint();
            let ada = &ad * &a;
            let term = &(&(&ada * rho.mat()) + &(rho.mat() * &ada))
                - &(&(&a * rho.mat()) * &ad).scale_re(2.0);
            lindblad = &lindblad + &term.scale_re(0.5);
        }
        assert!(ops.dissipator(rho.mat()).max_abs_diff(&lindblad) < 1e-15);
        // and λ (P_S ρ P_L + P_L ρ P_S)
        let q = QuasispinBasis::new();
        let direct = (&(&(&q.up * rho.mat()) * &q.down) + &(&(&q.down * rho.mat()) * &q.up))
            .scale_re(0.7);
        assert!(ops.dissipator(rho.mat()).max_abs_diff(&direct) < 1e-15);
    }

    #[test]
    fn analytic_1p_zero_time_and_pure_qm_limit() {
        let p = params(0.0);
        let rho0 = sample_1p();
        assert_eq!(evolve_1p_analytic(&rho0, 0.0, &p).unwrap(), rho0);
        for t in [0.3, 1.0, 4.0] {
            let rho = evolve_1p_analytic(&rho0, t, &p).unwrap();
            let ratio = rho.mat()[(1, 0)].norm() / rho0.mat()[(1, 0)].norm();
            assert!((ratio - (-p.gamma() * t).exp()).abs() < 1e-15);
        }
        assert!(matches!(
            evolve_1p_analytic(&rho0, -1.0, &p),
            Err(Error::NegativeTime(_))
        ));
    }

    #[test]
    fn analytic_2p_basics() {
        let p = params(0.25);
        assert_eq!(evolve_2p_analytic(0.0, &p).unwrap(), singlet_state());
        let rho = evolve_2p_analytic(1.0, &p).unwrap();
        let ratio = rho.mat()[(1, 2)].re / rho.mat()[(1, 1)].re;
        assert!((ratio + (-0.25f64).exp()).abs() < 1e-15);
        assert!((rho.trace() - (-2.0 * p.gamma()).exp()).abs() < 1e-15);
        assert!(evolve_2p_analytic(-0.1, &p).is_err());
    }

    #[test]
    fn pure_qm_limit_stays_pure() {
        let p = params(0.0);
        for t in [0.0, 0.5, 2.0, 7.0] {
            let n = normalize(&evolve_2p_analytic(t, &p).unwrap()).unwrap();
            assert!(n.mat().max_abs_diff(singlet_state().mat()) < 1e-15);
        }
    }

    #[test]
    fn normalize_behaviour() {
        let s = singlet_state();
        assert_eq!(normalize(&s).unwrap(), s);
        let p = params(0.4);
        let n = normalize(&evolve_2p_analytic(3.0, &p).unwrap()).unwrap();
        assert!(n.is_normalized());
        assert!((n.trace() - 1.0).abs() < 1e-12);
        let e = (-1.2f64).exp();
        let want = CMatrix::from_real_rows([
            [0.0, 0.0, 0.0, 0.0],
            [0.0, 0.5, -0.5 * e, 0.0],
            [0.0, -0.5 * e, 0.5, 0.0],
            [0.0, 0.0, 0.0, 0.0],
        ])
        .unwrap();
        assert!(n.mat().max_abs_diff(&want) < 1e-15);

        let gone = evolve_2p_analytic(2000.0, &p).unwrap_err();
        assert!(matches!(gone, Error::InvalidTrace(_)) || matches!(gone, Error::FullyDecayed(_)));
    }

    #[test]
    fn numeric_rejects_bad_arguments() {
        let p = params(0.25);
        let h = EffectiveHamiltonian::single_particle(&p);
        let ops = LindbladOperatorSet::single_particle(0.25).unwrap();
        let rho = sample_1p();
        assert!(evolve_numeric(&rho, &h, &ops, 1.0, 0.0).is_err());
        assert!(evolve_numeric(&rho, &h, &ops, 1.0, -1e-3).is_err());
        assert!(evolve_numeric(&rho, &h, &ops, -1.0, 1e-3).is_err());
        let ops2 = LindbladOperatorSet::two_particle(0.25).unwrap();
        assert!(matches!(
            evolve_numeric(&rho, &h, &ops2, 1.0, 1e-3),
            Err(Error::Dimension { .. })
        ));
        assert!(evolve_numeric(&singlet_state(), &h, &ops, 1.0, 1e-3).is_err());
    }

    #[test]
    fn numeric_unitary_limit_conserves_trace() {
        let q = QuasispinBasis::new();
        let h = EffectiveHamiltonian::from_matrix(
            &q.sigma_z.scale_re(0.47) + &q.sigma_x.scale_re(0.3),
        );
        let ops = LindbladOperatorSet::single_particle(0.0).unwrap();
        let rho0 = sample_1p();
        let times: Vec<f64> = (0..=20).map(|i| 0.5 * i as f64).collect();
        for rho in evolve_numeric_grid(&rho0, &h, &ops, &times, DEFAULT_RK4_STEP).unwrap() {
            assert!((rho.trace() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn numeric_matches_1p_analytic() {
        let p = params(0.25);
        let h = EffectiveHamiltonian::single_particle(&p);
        let ops = LindbladOperatorSet::single_particle(p.lambda()).unwrap();
        let rho0 = sample_1p();
        for t in [1.0, 5.0] {
            let num = evolve_numeric(&rho0, &h, &ops, t, DEFAULT_RK4_STEP).unwrap();
            let ana = evolve_1p_analytic(&rho0, t, &p).unwrap();
            assert!(num.mat().max_abs_diff(ana.mat()) < 1e-8, "t = {t}");
        }
    }
}
