//! Entanglement measures of the decohering kaon pair.
//!
//! All quantities act on the normalized two-particle state ρ_N(t), which
//! is a mixture of the Bell states ψ⁻ and ψ⁺ with weights (1 ± e^{−λt})/2.
//! Entropies are in bits.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::{normalized_2p, KaonParams};
use crate::observables::{zeta_eval, ZetaModel};
use crate::qmat::{
    herm_eigen, herm_eigvals, partial_trace, r, tensor, CMatrix, DensityMatrix, QuasispinBasis,
    Side, C64, POSITIVITY_TOL,
};

/// Off-diagonal Bell-basis weight still treated as Bell-diagonal.
pub const BELL_DIAGONAL_TOL: f64 = 1e-10;

/// Binary entropy `H(x) = −x log₂x − (1−x) log₂(1−x)` with `0·log 0 = 0`.
pub fn binary_entropy(x: f64) -> f64 {
    plogp(x) + plogp(1.0 - x)
}

fn plogp(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.log2()
    }
}

/// Von Neumann entropy −Tr ρ log₂ ρ of a normalized state.
pub fn vn_entropy(rho: &DensityMatrix) -> Result<f64> {
    rho.require_normalized()?;
    Ok(herm_eigvals(rho.mat())?.into_iter().map(plogp).sum())
}

/// Entropies of the left and right reduced states.
pub fn reduced_entropies(rho: &DensityMatrix) -> Result<(f64, f64)> {
    rho.require_dim(4)?;
    rho.require_normalized()?;
    let left = partial_trace(rho, Side::Right)?;
    let right = partial_trace(rho, Side::Left)?;
    Ok((vn_entropy(&left)?, vn_entropy(&right)?))
}

/// The four Bell states, in the order ψ⁻, ψ⁺, φ⁻, φ⁺.
///
/// ψ∓ = (|e₁⟩ ∓ |e₂⟩)/√2 live in the SL/LS block, φ∓ = (|SS⟩ ∓ |LL⟩)/√2.
pub fn bell_states() -> [[C64; 4]; 4] {
    let (z, h) = (r(0.0), r(FRAC_1_SQRT_2));
    [
        [z, h, -h, z],
        [z, h, h, z],
        [h, z, z, -h],
        [h, z, z, h],
    ]
}

/// Weights of ρ on the Bell states.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BellDecomposition {
    pub w_minus: f64,
    pub w_plus: f64,
    pub w_phi_minus: f64,
    pub w_phi_plus: f64,
}

impl BellDecomposition {
    pub fn weights(&self) -> [f64; 4] {
        [self.w_minus, self.w_plus, self.w_phi_minus, self.w_phi_plus]
    }

    pub fn max_weight(&self) -> f64 {
        self.weights().into_iter().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// ρ expressed in the Bell basis, `B† ρ B`.
fn in_bell_basis(rho: &CMatrix) -> CMatrix {
    let states = bell_states();
    let mut b = CMatrix::zeros(4).expect("4x4");
    for (col, v) in states.iter().enumerate() {
        for (row, &x) in v.iter().enumerate() {
            b[(row, col)] = x;
        }
    }
    &(&b.adjoint() * rho) * &b
}

pub fn bell_decompose(rho: &DensityMatrix) -> Result<BellDecomposition> {
    rho.require_dim(4)?;
    rho.require_normalized()?;
    let m = in_bell_basis(rho.mat());
    Ok(BellDecomposition {
        w_minus: m[(0, 0)].re,
        w_plus: m[(1, 1)].re,
        w_phi_minus: m[(2, 2)].re,
        w_phi_plus: m[(3, 3)].re,
    })
}

/// Outcome of a positivity-based separability criterion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeparabilityTest {
    /// No negative eigenvalue beyond the positivity tolerance.
    pub separable_candidate: bool,
    pub min_eigval: f64,
}

impl SeparabilityTest {
    fn from_min(min_eigval: f64) -> Self {
        Self {
            separable_candidate: min_eigval >= POSITIVITY_TOL,
            min_eigval,
        }
    }
}

fn min_eigval(m: &CMatrix) -> Result<f64> {
    Ok(herm_eigvals(m)?.last().copied().unwrap_or(0.0))
}

/// Peres–Horodecki test: smallest eigenvalue over both partial transposes.
pub fn ppt_test(rho: &DensityMatrix) -> Result<SeparabilityTest> {
    rho.require_dim(4)?;
    rho.require_normalized()?;
    let left = min_eigval(&rho.mat().partial_transpose(Side::Left)?)?;
    let right = min_eigval(&rho.mat().partial_transpose(Side::Right)?)?;
    Ok(SeparabilityTest::from_min(left.min(right)))
}

/// Reduction criterion: ρ^l ⊗ 1 − ρ and 1 ⊗ ρ^r − ρ must both be positive.
pub fn reduction_test(rho: &DensityMatrix) -> Result<SeparabilityTest> {
    rho.require_dim(4)?;
    rho.require_normalized()?;
    let id = CMatrix::identity(2)?;
    let rho_l = rho.mat().partial_trace(Side::Right)?;
    let rho_r = rho.mat().partial_trace(Side::Left)?;
    let a = min_eigval(&(&tensor(&rho_l, &id)? - rho.mat()))?;
    let b = min_eigval(&(&tensor(&id, &rho_r)? - rho.mat()))?;
    Ok(SeparabilityTest::from_min(a.min(b)))
}

/// Spin-flipped matrix `(σ_y ⊗ σ_y) ρ* (σ_y ⊗ σ_y)`, conjugation in the product basis.
pub fn spin_flip(m: &CMatrix) -> Result<CMatrix> {
    if m.dim() != 4 {
        return Err(Error::Dimension {
            expected: 4,
            got: m.dim(),
        });
    }
    let q = QuasispinBasis::new();
    let yy = tensor(&q.sigma_y, &q.sigma_y)?;
    Ok(&(&yy * &m.conj()) * &yy)
}

/// Square roots of the eigenvalues of ρρ̃ in decreasing order.
///
/// ρρ̃ is similar to the Hermitian positive matrix √ρ ρ̃ √ρ, whose spectrum
/// is used instead. Round-off negatives are clamped to zero before the root.
pub fn concurrence_roots(rho: &DensityMatrix) -> Result<[f64; 4]> {
    rho.require_dim(4)?;
    let sqrt_rho = herm_eigen(rho.mat())?.map(|x| x.max(0.0).sqrt());
    let flipped = spin_flip(rho.mat())?;
    let m = (&(&sqrt_rho * &flipped) * &sqrt_rho).hermitian_part();
    let vals = herm_eigvals(&m)?;
    let mut roots = [0.0; 4];
    for (out, v) in roots.iter_mut().zip(vals) {
        *out = v.max(0.0).sqrt();
    }
    Ok(roots)
}

/// Wootters concurrence `max{0, l₁ − l₂ − l₃ − l₄}`.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    rho.require_normalized()?;
    let l = concurrence_roots(rho)?;
    Ok((l[0] - l[1] - l[2] - l[3]).clamp(0.0, 1.0))
}

/// Fully entangled fraction of a Bell-diagonal state, its largest Bell weight.
///
/// States with Bell-basis coherences above [`BELL_DIAGONAL_TOL`] are
/// rejected; the general maximization is not implemented.
pub fn fully_entangled_fraction(rho: &DensityMatrix) -> Result<f64> {
    rho.require_dim(4)?;
    rho.require_normalized()?;
    let m = in_bell_basis(rho.mat());
    let mut off: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                off = off.max(m[(i, j)].norm());
            }
        }
    }
    if off > BELL_DIAGONAL_TOL {
        return Err(Error::NotBellDiagonal(off));
    }
    Ok(bell_decompose(rho)?.max_weight())
}

/// Entanglement of formation as a function of concurrence, `H(½ + ½√(1 − C²))`.
pub fn eof_from_concurrence(c: f64) -> f64 {
    let c = c.clamp(0.0, 1.0);
    let s = (1.0 - c * c).max(0.0).sqrt();
    binary_entropy(0.5 * (1.0 + s))
}

/// Lower bound on the entanglement of formation from the fully entangled
/// fraction, `H(½ + √(f(1 − f)))` for `f ≥ ½` and zero otherwise.
pub fn eof_from_fraction(f: f64) -> f64 {
    if f < 0.5 {
        0.0
    } else {
        binary_entropy(0.5 + (f * (1.0 - f)).max(0.0).sqrt())
    }
}

/// Entanglement of formation of a two-qubit state.
pub fn eof(rho: &DensityMatrix) -> Result<f64> {
    Ok(eof_from_concurrence(concurrence(rho)?))
}

/// Every entanglement quantity of ρ_N(t) at one instant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntanglementReport {
    pub t: f64,
    pub lambda: f64,
    pub entropy: f64,
    pub reduced_entropy_left: f64,
    pub reduced_entropy_right: f64,
    pub bell: BellDecomposition,
    pub ppt_min_eigval: f64,
    pub reduction_min_eigval: f64,
    pub concurrence: f64,
    pub fraction: f64,
    pub eof: f64,
    pub zeta: f64,
    pub loss_c: f64,
    pub loss_e: f64,
}

pub fn entanglement_report(t: f64, p: &KaonParams) -> Result<EntanglementReport> {
    let rho = normalized_2p(t, p)?;
    let (left, right) = reduced_entropies(&rho)?;
    let concurrence = concurrence(&rho)?;
    let eof = eof_from_concurrence(concurrence);
    Ok(EntanglementReport {
        t,
        lambda: p.lambda(),
        entropy: vn_entropy(&rho)?,
        reduced_entropy_left: left,
        reduced_entropy_right: right,
        bell: bell_decompose(&rho)?,
        ppt_min_eigval: ppt_test(&rho)?.min_eigval,
        reduction_min_eigval: reduction_test(&rho)?.min_eigval,
        concurrence,
        fraction: fully_entangled_fraction(&rho)?,
        eof,
        zeta: zeta_eval(&ZetaModel::SingleTime { lambda: p.lambda() }, t, t)?,
        loss_c: 1.0 - concurrence,
        loss_e: 1.0 - eof,
    })
}

/// Reports along a sorted, non-negative time grid.
pub fn sweep_report(t_grid: &[f64], p: &KaonParams) -> Result<Vec<EntanglementReport>> {
    if t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("time grid must be sorted".into()));
    }
    t_grid.iter().map(|&t| entanglement_report(t, p)).collect()
}
