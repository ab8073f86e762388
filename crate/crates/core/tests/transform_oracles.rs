mod common;

use common::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use pmfht::linalg::{CMatrix, CVector};
use pmfht::spectral_ops::{self, Weighting};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn fractional_power_matches_schur_oracle() {
    let fx = fixture(random_cloud(40, 11));
    for alpha in [-0.7, 0.0, 0.3, 1.0, 1.6, 2.0] {
        let err = max_abs(&(fx.t.fractional_matrix(alpha) - oracle_power(&fx.f, alpha)));
        assert!(err < 1e-8, "alpha={alpha} err={err:e}");
    }
}

#[test]
fn integer_orders_are_plain_matrix_powers() {
    let fx = fixture(random_cloud(30, 3));
    let f = complex(&fx.f);
    assert!(max_abs(&(fx.t.fractional_matrix(1.0) - &f)) < 1e-9);
    assert!(max_abs(&(fx.t.fractional_matrix(2.0) - &f * &f)) < 1e-9);
    assert!(max_abs(&(fx.t.fractional_matrix(-1.0) - f.transpose())) < 1e-9);
    let n = fx.t.len();
    assert_eq!(fx.t.fractional_matrix(0.0), CMatrix::identity(n, n));
}

#[test]
fn spectrum_at_one_is_harmonic_projection() {
    let fx = fixture(random_cloud(25, 5));
    let coords = fx.cloud.coordinates();
    let s = fx.t.forward_real(1.0, &coords).unwrap();
    // H^T B f, written out without the transform
    let h = &fx.basis.eigenvectors;
    let bf = DMatrix::from_fn(coords.nrows(), 3, |i, c| fx.lbo.mass[i] * coords[(i, c)]);
    let expected = complex(&(h.transpose() * bf));
    assert!(max_abs(&(s.coeffs - &expected)) <= 1e-9 * max_abs(&expected));
}

#[test]
fn convolution_equals_sum_of_oracle_translations() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for n in [12, 16] {
        let fx = fixture(random_cloud(n, n as u64));
        let alpha = rng.random_range(-1.0..1.0);
        let fa = oracle_power(&fx.f, alpha);
        let fb = oracle_power(&fx.f, -alpha);
        let b = half_mass(&fx.lbo);
        let f = random_signal(n, &mut rng);
        let g = random_signal(n, &mut rng);
        let g_hat = &fa * CVector::from_fn(n, |i, _| g[i] * b[i]);
        let mut expected = CVector::zeros(n);
        for i in 0..n {
            let delta = fa.column(i) * Complex64::new(b[i], 0.0);
            let ti = &fb * g_hat.component_mul(&delta);
            expected += CVector::from_fn(n, |r, _| ti[r] / b[r]) * f[i];
        }
        let got = spectral_ops::convolve(&fx.t, alpha, &f, &g).unwrap();
        assert!(rel_err(&got, &expected) < 1e-9);
        let summed = spectral_ops::convolve_by_translation(&fx.t, alpha, &f, &g, Weighting::Plain).unwrap();
        assert!(rel_err(&summed, &expected) < 1e-9);
    }
}

#[test]
fn correlation_uses_conjugate_impulses() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = 10;
    let fx = fixture(random_cloud(n, 77));
    let alpha = 0.45;
    let f = random_signal(n, &mut rng);
    let g = random_signal(n, &mut rng);
    let mut expected = CVector::zeros(n);
    for i in 0..n {
        expected += spectral_ops::translate_conjugate(&fx.t, alpha, &g, i).unwrap() * f[i].conj();
    }
    let got = spectral_ops::correlate(&fx.t, alpha, &f, &g).unwrap();
    assert!(rel_err(&got, &expected) < 1e-9);
}
