//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

pub mod explicit;
pub mod ode;
pub mod operators;

use std::sync::Arc;

use cbs_core::linalg::{eigen_decompose, Mat3, SpectralDecomposition, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn z(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Bloch matrix written out entry by entry.
pub fn bloch(rabi: C64, delta: f64) -> Mat3 {
    let i = z(0.0, 1.0);
    Mat3::new(
        z(-1.0, delta), z(0.0, 0.0), -i * rabi / 2.0,
        z(0.0, 0.0), z(-1.0, -delta), i * rabi.conj() / 2.0,
        -i * rabi.conj(), i * rabi, z(-2.0, 0.0),
    )
}

/// Random (Ω, δ) with Ω ∈ [0.1, 6], δ ∈ [−4, 4].
pub fn random_params(r: &mut ChaCha8Rng) -> (f64, f64) {
    (r.random_range(0.1..6.0), r.random_range(-4.0..4.0))
}

pub fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

/// Decomposed Bloch matrix at random (Ω, δ) and random laser phase.
pub fn random_sys(r: &mut ChaCha8Rng) -> Arc<SpectralDecomposition> {
    let (o, d) = random_params(r);
    Arc::new(eigen_decompose(&bloch(C64::from_polar(o, r.random_range(0.0..6.3)), d)).unwrap())
}
