use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zerohopf::dynamics::{jacobian, Mode, State, SystemParams};
use zerohopf::equilibria::{classify, eigenvalues_at, nonresonance_check, Classification};

fn params(a: f64) -> SystemParams {
    SystemParams::new(a, 0.0, 9.0)
}

/// The rule table written out directly.
fn expected(z0: f64, a: f64, b: f64) -> Classification {
    let disc = z0 * z0 - 4.0 * a;
    if z0 == 0.0 && a > 0.0 && b == 0.0 {
        Classification::ZeroHopf
    } else if z0 == 0.0 {
        Classification::OriginExcluded
    } else if a > 0.0 && z0.abs() < 2.0 * a.sqrt() {
        Classification::AnalyticFirstIntegral
    } else if (a > 0.0 && disc > 0.0) || a < 0.0 {
        Classification::FormalFirstIntegral
    } else {
        Classification::Undetermined
    }
}

#[test]
fn vieta_on_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let a: f64 = rng.gen_range(-10.0..10.0);
        let z0: f64 = rng.gen_range(-10.0..10.0);
        let [l1, l2, l3] = eigenvalues_at(z0, &params(a));
        assert_eq!(l1.norm(), 0.0);
        let sum = l2 + l3;
        let prod = l2 * l3;
        assert!((sum.re - z0).abs() <= 1e-12 * z0.abs().max(1.0) && sum.im.abs() <= 1e-12 * z0.abs().max(1.0));
        assert!((prod.re - a).abs() <= 1e-12 * a.abs() && prod.im.abs() <= 1e-12 * a.abs().max(1e-300));
    }
}

#[test]
fn eigenvalues_match_the_jacobian() {
    // the characteristic polynomial of the linearization at (0, 0, z0)
    let p = SystemParams::new(2.5, 0.0, 9.0);
    for z0 in [-3.0, -0.5, 0.7, 4.0] {
        let j = jacobian(&State::new(0.0, 0.0, z0), &p, Mode::Full);
        let trace = j[0][0] + j[1][1] + j[2][2];
        let minors = j[0][0] * j[1][1] - j[0][1] * j[1][0] + j[0][0] * j[2][2] - j[0][2] * j[2][0]
            + j[1][1] * j[2][2] - j[1][2] * j[2][1];
        let [_, l2, l3] = eigenvalues_at(z0, &p);
        assert!(((l2 + l3).re - trace).abs() < 1e-12);
        assert!(((l2 * l3).re - minors).abs() < 1e-12);
    }
}

#[test]
fn classification_grid() {
    for a in [-2.0, 0.0, 1.0, 2.5, 4.0] {
        for b in [0.0, 1.0] {
            let p = SystemParams::new(a, b, 9.0);
            for k in 0..=400 {
                let z0 = -5.0 + k as f64 * 0.025;
                assert_eq!(classify(z0, &p), expected(z0, a, b), "a {a} b {b} z0 {z0}");
            }
            for z0 in [-4.0, 4.0, -2.0, 2.0] {
                assert_eq!(classify(z0, &p), expected(z0, a, b), "a {a} b {b} z0 {z0}");
            }
        }
    }
}

proptest! {
    #[test]
    fn classification_is_even(z0 in -10.0..10.0f64, a in -5.0..5.0f64) {
        let p = params(a);
        prop_assert_eq!(classify(z0, &p), classify(-z0, &p));
    }

    #[test]
    fn same_sign_real_spectrum_is_nonresonant(a in 0.01..5.0f64, extra in 0.01..5.0f64, neg in any::<bool>(), kmax in 1u32..=64) {
        let z = (4.0 * a + extra).sqrt();
        let z0 = if neg { -z } else { z };
        prop_assert!(nonresonance_check(z0, &params(a), kmax).nonresonant);
    }
}

#[test]
fn rational_ratio_is_resonant() {
    // l2 = 2, l3 = -1 resonate at (1, 2)
    let r = nonresonance_check(1.0, &params(-2.0), 64);
    assert_eq!(r.offending, Some((1, 2)));
}
