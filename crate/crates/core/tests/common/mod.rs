//! Independent reference implementations shared by the integration tests.
//!
//! Fractional powers here come from a complex Schur factorization of the
//! dense harmonic matrix, not from the crate's structured eigensolver.

#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;
use pmfht::geometry::{build_lbo, solve_harmonic_basis, HarmonicBasis, LboPair, LboParams, PointCloud};
use pmfht::linalg::{CMatrix, CVector};
use pmfht::transform::{build_transform, harmonic_matrix, ManifoldTransform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Fixture {
    pub cloud: PointCloud,
    pub lbo: LboPair,
    pub basis: HarmonicBasis,
    pub t: ManifoldTransform,
    /// Dense real `H^T B^{1/2}`.
    pub f: DMatrix<f64>,
}

/// Points scattered on a randomly stretched, bumpy sphere.
pub fn random_cloud(n: usize, seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let axes = [rng.random_range(0.7..1.3), rng.random_range(0.7..1.3), rng.random_range(0.7..1.3)];
    let bump = rng.random_range(0.0..0.15);
    let points = (0..n)
        .map(|_| {
            let z: f64 = rng.random_range(-1.0..1.0);
            let phi: f64 = rng.random_range(0.0..2.0 * PI);
            let s = (1.0 - z * z).sqrt();
            let r = 1.0 + bump * (3.0 * phi).sin() * z;
            [axes[0] * r * s * phi.cos(), axes[1] * r * s * phi.sin(), axes[2] * r * z]
        })
        .collect();
    PointCloud::new(points).unwrap()
}

pub fn fixture(cloud: PointCloud) -> Fixture {
    let params = LboParams::from_cloud(&cloud).unwrap();
    let lbo = build_lbo(&cloud, &params).unwrap();
    let basis = solve_harmonic_basis(&lbo).unwrap();
    let t = build_transform(&basis, &lbo).unwrap();
    let f = harmonic_matrix(&basis, &lbo.mass);
    Fixture { cloud, lbo, basis, t, f }
}

pub fn complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

/// `F^alpha` on the principal branch, with eigenvalue `-1` taken at `+pi`.
pub fn oracle_power(f: &DMatrix<f64>, alpha: f64) -> CMatrix {
    let (q, t) = Schur::new(complex(f)).unpack();
    let n = f.nrows();
    let mut d = CMatrix::zeros(n, n);
    for k in 0..n {
        let w = t[(k, k)];
        let mut theta = w.arg();
        if theta <= -PI + 1e-7 {
            theta = PI;
        }
        d[(k, k)] = Complex64::from_polar(1.0, alpha * theta);
    }
    &q * d * q.adjoint()
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Max row sum of absolute values.
pub fn inf_norm(m: &CMatrix) -> f64 {
    m.row_iter().map(|r| r.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn rel_err(a: &CVector, b: &CVector) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

pub fn random_signal(n: usize, rng: &mut impl Rng) -> CVector {
    CVector::from_fn(n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub fn half_mass(lbo: &LboPair) -> DVector<f64> {
    lbo.mass.map(f64::sqrt)
}
