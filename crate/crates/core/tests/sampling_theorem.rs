mod common;

use common::*;
use num_complex::Complex64;
use pmfht::linalg::{sigma_min, CMatrix};
use pmfht::sampling::{bandlimit, exhaustive_sampling, make_plan, optimal_sampling};
use pmfht::Error;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(n: usize, c: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(n, c, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

#[test]
fn bandlimited_signals_are_recovered_from_greedy_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let fx = fixture(random_cloud(40, 21));
    for _ in 0..5 {
        let alpha = rng.random_range(0.0..1.0);
        let kb = rng.random_range(1..=8);
        let k = rng.random_range(kb..=kb + 6);
        let f = bandlimit(&fx.t, alpha, &random_matrix(40, 2, &mut rng), kb).unwrap();
        let idx = optimal_sampling(&fx.t, alpha, kb, k).unwrap();
        let plan = make_plan(&fx.t, alpha, &idx, kb).unwrap();
        let rebuilt = plan.reconstruct(&plan.sample(&f).unwrap()).unwrap();
        assert!((&rebuilt - &f).norm() <= 1e-8 * f.norm());
    }
}

#[test]
fn noise_amplification_stays_under_the_operator_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let fx = fixture(random_cloud(30, 4));
    let idx = optimal_sampling(&fx.t, 0.6, 6, 10).unwrap();
    let plan = make_plan(&fx.t, 0.6, &idx, 6).unwrap();
    let f = bandlimit(&fx.t, 0.6, &random_matrix(30, 1, &mut rng), 6).unwrap();
    for _ in 0..50 {
        let noise = random_matrix(10, 1, &mut rng).unscale(1e3);
        let clean = plan.sample(&f).unwrap();
        let err = (plan.reconstruct(&(clean + &noise)).unwrap() - &f).norm();
        assert!(err <= plan.noise_gain() * noise.norm() * (1.0 + 1e-12));
    }
}

#[test]
fn greedy_never_beats_the_exhaustive_optimum() {
    let fx = fixture(random_cloud(12, 90));
    for (alpha, kb, k) in [(0.3, 3, 4), (0.8, 4, 6), (1.0, 2, 2)] {
        let best = exhaustive_sampling(&fx.t, alpha, kb, k).unwrap();
        let greedy = optimal_sampling(&fx.t, alpha, kb, k).unwrap();
        let s_best = make_plan(&fx.t, alpha, &best, kb).unwrap().sigma_min;
        let s_greedy = make_plan(&fx.t, alpha, &greedy, kb).unwrap().sigma_min;
        assert!(s_greedy <= s_best * (1.0 + 1e-12));
        // the exhaustive winner dominates a batch of random subsets
        let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
        for _ in 0..20 {
            let pick = sample(&mut rng, 12, k).into_vec();
            if let Ok(p) = make_plan(&fx.t, alpha, &pick, kb) {
                assert!(p.sigma_min <= s_best * (1.0 + 1e-12));
            }
        }
    }
}

#[test]
fn too_few_or_repeated_samples_are_rejected() {
    let fx = fixture(random_cloud(20, 2));
    assert!(matches!(make_plan(&fx.t, 0.5, &[0, 1], 3), Err(Error::InvalidParameter(_))));
    assert!(matches!(make_plan(&fx.t, 0.5, &[0, 0, 1], 3), Err(Error::InvalidParameter(_))));
    assert!(matches!(make_plan(&fx.t, 0.5, &[0, 1, 40], 3), Err(Error::IndexOutOfRange { .. })));
    assert!(optimal_sampling(&fx.t, 0.5, 3, 21).is_err());
}

#[test]
fn constant_mode_alone_makes_one_sample_sufficient() {
    // band 1 at order 1 is the constant harmonic, which no point can miss
    let fx = fixture(random_cloud(20, 6));
    for i in 0..20 {
        let plan = make_plan(&fx.t, 1.0, &[i], 1).unwrap();
        assert!(plan.sigma_min > 0.0);
        assert!(sigma_min(&plan.basis.rows(i, 1).into_owned()) > 0.0);
    }
}
