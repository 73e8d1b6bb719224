//! Shared generators and fixtures for the integration tests.
#![allow(dead_code)]

use kaon_decoherence::{CMatrix, DensityMatrix, KaonParams};
use num_complex::Complex64;
use proptest::prelude::*;

pub fn params(lambda: f64) -> KaonParams {
    KaonParams::default().with_lambda(lambda).unwrap()
}

pub fn cplx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Arbitrary complex matrix with entries in [−1, 1] + i[−1, 1].
pub fn arb_matrix(dim: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), dim * dim).prop_map(move |v| {
        CMatrix::new(dim, v.into_iter().map(|(re, im)| cplx(re, im)).collect()).unwrap()
    })
}

pub fn arb_hermitian(dim: usize) -> impl Strategy<Value = CMatrix> {
    arb_matrix(dim).prop_map(|m| m.hermitian_part())
}

/// Normalized density matrix `AA†/Tr(AA†)`.
pub fn arb_density(dim: usize) -> impl Strategy<Value = DensityMatrix> {
    arb_matrix(dim)
        .prop_filter("non-degenerate", |a| (a * &a.adjoint()).trace().re > 1e-3)
        .prop_map(|a| {
            let m = &a * &a.adjoint();
            let tr = m.trace().re;
            DensityMatrix::new(m.scale_re(1.0 / tr).hermitian_part()).unwrap()
        })
}
