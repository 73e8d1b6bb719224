//! Small dense complex matrices for one and two quasispin systems.
//!
//! Everything here lives in C² or C² ⊗ C². The single-particle basis is
//! ordered (K_S, K_L), i.e. index 0 is spin up and index 1 is spin down.
//! The two-particle basis is the Kronecker ordering (SS, SL, LS, LL), so
//! |e₁⟩ = |K_S⟩⊗|K_L⟩ sits at index 1 and |e₂⟩ = |K_L⟩⊗|K_S⟩ at index 2.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Entrywise tolerance for Hermiticity checks.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Smallest eigenvalue still accepted as positive semidefinite.
pub const POSITIVITY_TOL: f64 = -1e-10;
/// Tolerance on the trace of a normalized state.
pub const TRACE_TOL: f64 = 1e-12;

const MAX_SWEEPS: usize = 64;

#[inline]
pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub(crate) fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Which factor of C² ⊗ C² an operation acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    /// The left-moving particle, the first Kronecker factor.
    Left,
    /// The right-moving particle, the second Kronecker factor.
    Right,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

fn check_dim(dim: usize) -> Result<()> {
    match dim {
        2 | 4 => Ok(()),
        d => Err(Error::UnsupportedDimension(d)),
    }
}

/// Square complex matrix of dimension 2 or 4, stored row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn new(dim: usize, data: Vec<C64>) -> Result<Self> {
        check_dim(dim)?;
        if data.len() != dim * dim {
            return Err(Error::Dimension {
                expected: dim * dim,
                got: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            dim,
            data: vec![C64::default(); dim * dim],
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut m = Self::zeros(dim)?;
        for i in 0..dim {
            m[(i, i)] = r(1.0);
        }
        Ok(m)
    }

    pub fn from_diag(diag: &[C64]) -> Result<Self> {
        let mut m = Self::zeros(diag.len())?;
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        Ok(m)
    }

    /// Builds a matrix from complex rows.
    pub fn from_rows<const N: usize>(rows: [[C64; N]; N]) -> Result<Self> {
        Self::new(N, rows.iter().flatten().copied().collect())
    }

    /// Builds a matrix from real rows.
    pub fn from_real_rows<const N: usize>(rows: [[f64; N]; N]) -> Result<Self> {
        Self::new(N, rows.iter().flatten().map(|&x| r(x)).collect())
    }

    /// The outer product |v⟩⟨w|.
    pub fn outer(v: &[C64], w: &[C64]) -> Result<Self> {
        if v.len() != w.len() {
            return Err(Error::Dimension {
                expected: v.len(),
                got: w.len(),
            });
        }
        let n = v.len();
        let mut m = Self::zeros(n)?;
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = v[i] * w[j].conj();
            }
        }
        Ok(m)
    }

    /// The projector |v⟩⟨v|.
    pub fn projector(v: &[C64]) -> Result<Self> {
        Self::outer(v, v)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = self[(j, i)].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = self[(j, i)];
            }
        }
        out
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, k: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * k).collect(),
        }
    }

    pub fn scale_re(&self, k: f64) -> Self {
        self.scale(r(k))
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "max_abs_diff on mismatched dimensions");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - self†`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim;
        let mut err: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                err = err.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        err
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_error() <= HERMITIAN_TOL
    }

    /// (M + M†)/2, which has an exactly real diagonal.
    pub fn hermitian_part(&self) -> Self {
        let n = self.dim;
        let mut out = self.clone();
        for i in 0..n {
            out[(i, i)] = r(self[(i, i)].re);
            for j in (i + 1)..n {
                let z = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
                out[(i, j)] = z;
                out[(j, i)] = z.conj();
            }
        }
        out
    }

    pub fn commutator(&self, other: &CMatrix) -> CMatrix {
        &(self * other) - &(other * self)
    }

    /// Kronecker product with `self` as the left factor.
    pub fn kron(&self, other: &CMatrix) -> Result<CMatrix> {
        tensor(self, other)
    }

    /// Traces out the subsystem on `side`.
    pub fn partial_trace(&self, side: Side) -> Result<CMatrix> {
        if self.dim != 4 {
            return Err(Error::Dimension {
                expected: 4,
                got: self.dim,
            });
        }
        let mut out = CMatrix::zeros(2)?;
        for a in 0..2 {
            for b in 0..2 {
                out[(a, b)] = (0..2)
                    .map(|k| match side {
                        // keep right indices (a, b), sum the left index
                        Side::Left => self[(2 * k + a, 2 * k + b)],
                        // keep left indices (a, b), sum the right index
                        Side::Right => self[(2 * a + k, 2 * b + k)],
                    })
                    .sum();
            }
        }
        Ok(out)
    }

    /// Transposes the factor on `side`, leaving the other untouched.
    pub fn partial_transpose(&self, side: Side) -> Result<CMatrix> {
        if self.dim != 4 {
            return Err(Error::Dimension {
                expected: 4,
                got: self.dim,
            });
        }
        let mut out = self.clone();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let v = self[(2 * i + k, 2 * j + l)];
                        match side {
                            Side::Left => out[(2 * j + k, 2 * i + l)] = v,
                            Side::Right => out[(2 * i + l, 2 * j + k)] = v,
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix product on mismatched dimensions");
        let n = self.dim;
        let mut out = CMatrix {
            dim: n,
            data: vec![C64::default(); n * n],
        };
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == C64::default() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix sum on mismatched dimensions");
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix difference on mismatched dimensions");
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.scale_re(-1.0)
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Kronecker product of two single-particle operators:
/// `(a ⊗ b)[2i+k][2j+l] = a[i][j]·b[k][l]`.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    for m in [a, b] {
        if m.dim != 2 {
            return Err(Error::Dimension {
                expected: 2,
                got: m.dim,
            });
        }
    }
    let mut out = CMatrix::zeros(4)?;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    Ok(out)
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Eigenvalues in decreasing order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        (0..self.vectors.dim).map(|i| self.vectors[(i, k)]).collect()
    }

    /// Rebuilds `V f(D) V†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.vectors.dim;
        let mut out = CMatrix {
            dim: n,
            data: vec![C64::default(); n * n],
        };
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] += self.vectors[(i, k)] * self.vectors[(j, k)].conj() * w;
                }
            }
        }
        out
    }
}

/// Cyclic complex Jacobi diagonalization.
///
/// Each rotation first removes the phase of the pivot `a_pq` with a diagonal
/// unitary and then applies a real Givens rotation. Pivots negligible against
/// both diagonal entries are dropped, so tiny but isolated couplings (for
/// example `±e^{-λt}/2` between two zero diagonal entries) are still resolved
/// to full relative precision.
pub fn herm_eigen(m: &CMatrix) -> Result<HermitianEigen> {
    let err = m.hermiticity_error();
    if err > HERMITIAN_TOL {
        return Err(Error::NotHermitian(err));
    }
    let n = m.dim;
    let mut a = m.hermitian_part();
    let mut v = CMatrix::identity(n)?;

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)].norm())
            .sum();
        if off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let g = apq.norm();
                if g == 0.0 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                if app.abs() + 100.0 * g == app.abs() && aqq.abs() + 100.0 * g == aqq.abs() {
                    a[(p, q)] = C64::default();
                    a[(q, p)] = C64::default();
                    continue;
                }
                let phase = (apq / g).conj();
                let theta = (aqq - app) / (2.0 * g);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let cs = 1.0 / t.hypot(1.0);
                let sn = t * cs;

                let mut u = CMatrix::identity(n)?;
                u[(p, p)] = r(cs);
                u[(p, q)] = r(sn);
                u[(q, p)] = phase * (-sn);
                u[(q, q)] = phase * cs;

                a = &(&u.adjoint() * &a) * &u;
                a[(p, q)] = C64::default();
                a[(q, p)] = C64::default();
                for i in 0..n {
                    a[(i, i)] = r(a[(i, i)].re);
                }
                v = &v * &u;
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = CMatrix::zeros(n)?;
    for (col, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, col)] = v[(i, src)];
        }
    }
    Ok(HermitianEigen { values, vectors })
}

/// Real eigenvalues of a Hermitian matrix in decreasing order.
pub fn herm_eigvals(m: &CMatrix) -> Result<Vec<f64>> {
    Ok(herm_eigen(m)?.values)
}

/// A validated density operator on C² or C² ⊗ C².
///
/// Hermitian within [`HERMITIAN_TOL`], real trace in `(0, 1]` and no
/// eigenvalue below [`POSITIVITY_TOL`]. Decaying states keep their trace
/// below one until [`crate::evolution::normalize`] rescales them.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
    normalized: bool,
}

impl DensityMatrix {
    pub fn new(mat: CMatrix) -> Result<Self> {
        let herm = mat.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = mat.trace();
        if tr.im.abs() > TRACE_TOL || tr.re <= 0.0 || tr.re > 1.0 + TRACE_TOL {
            return Err(Error::InvalidTrace(tr.re));
        }
        let min = herm_eigvals(&mat)?.last().copied().unwrap_or(0.0);
        if min < POSITIVITY_TOL {
            return Err(Error::NotPositive(min));
        }
        let normalized = (tr.re - 1.0).abs() <= TRACE_TOL;
        Ok(Self { mat, normalized })
    }

    /// The pure state |ψ⟩⟨ψ| for a unit vector ψ.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        Self::new(CMatrix::projector(psi)?)
    }

    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_inner(self) -> CMatrix {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.dim
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub(crate) fn require_normalized(&self) -> Result<()> {
        if self.normalized {
            Ok(())
        } else {
            Err(Error::NotNormalized(self.trace()))
        }
    }

    pub(crate) fn require_dim(&self, dim: usize) -> Result<()> {
        if self.dim() == dim {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected: dim,
                got: self.dim(),
            })
        }
    }

    /// Tr(ρ²) / Tr(ρ)², one for pure states.
    pub fn purity(&self) -> f64 {
        let tr = self.trace();
        (&self.mat * &self.mat).trace().re / (tr * tr)
    }

    pub(crate) fn with_flag(mat: CMatrix, normalized: bool) -> Self {
        Self { mat, normalized }
    }
}

/// Reduced state after tracing out `side`.
pub fn partial_trace(rho: &DensityMatrix, side: Side) -> Result<DensityMatrix> {
    rho.require_dim(4)?;
    let reduced = rho.mat.partial_trace(side)?;
    Ok(DensityMatrix::with_flag(reduced, rho.normalized))
}

/// Partial transposition on `side`; not necessarily positive.
pub fn partial_transpose(rho: &DensityMatrix, side: Side) -> Result<CMatrix> {
    rho.require_dim(4)?;
    rho.mat.partial_transpose(side)
}

/// The quasispin operators on a single kaon.
///
/// `up`/`down` project onto K_S/K_L and `plus`/`minus` are the ladder
/// operators |K_S⟩⟨K_L| and |K_L⟩⟨K_S|.
#[derive(Clone, Debug)]
pub struct QuasispinBasis {
    pub up: CMatrix,
    pub down: CMatrix,
    pub plus: CMatrix,
    pub minus: CMatrix,
    pub sigma_x: CMatrix,
    pub sigma_y: CMatrix,
    pub sigma_z: CMatrix,
    pub identity: CMatrix,
}

impl QuasispinBasis {
    pub fn new() -> Self {
        let m = |rows: [[C64; 2]; 2]| CMatrix::from_rows(rows).expect("2x2 literal");
        let (o, l, i) = (r(0.0), r(1.0), c(0.0, 1.0));
        Self {
            up: m([[l, o], [o, o]]),
            down: m([[o, o], [o, l]]),
            plus: m([[o, l], [o, o]]),
            minus: m([[o, o], [l, o]]),
            sigma_x: m([[o, l], [l, o]]),
            sigma_y: m([[o, -i], [i, o]]),
            sigma_z: m([[l, o], [o, -l]]),
            identity: m([[l, o], [o, l]]),
        }
    }
}

impl Default for QuasispinBasis {
    fn default() -> Self {
        Self::new()
    }
}
