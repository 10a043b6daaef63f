#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;

use proptest::prelude::*;
use ultraslow::kernel::{
    an_threshold, choose_contour, constant_order_relaxation, constant_order_response, eval_en_contour,
    eval_gn_contour, eval_gn_spectral, inverse_moment_split, scaled_inverse_moment, spectral_density, ContourSpec,
    KernelConfig,
};
use ultraslow::weight::{make_box_weight, make_tapered_weight, WeightFunction};

fn unit() -> WeightFunction {
    WeightFunction::constant(1.0, 0.5, 0.25).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

// (λ, t, E, G) for μ ≡ 1 from Talbot inversion at 25 and 60 digits (identical to 18 digits).
const TALBOT: [(f64, f64, f64, f64); 5] = [
    (1.0, 1.0, 0.410_305_501_591_026_19, 0.123_960_285_962_511_684),
    (1.0, 0.1, 0.758_194_571_561_900_542, 1.376_649_065_541_021_25),
    (16.0, 0.1, 0.094_759_037_536_588_327_2, 0.035_970_255_281_402_184),
    (16.0, 1.0, 0.033_455_924_577_376_542_2, 0.000_725_267_085_068_271_062),
    (1.0, 10.0, 0.228_661_780_425_705_9, 0.004_690_795_572_686_319_3),
];

#[test]
fn kernels_match_talbot_inversion() {
    let w = unit();
    let cfg = KernelConfig::default();
    for (lambda, t, e, g) in TALBOT {
        let spec = choose_contour(t, 1.0, &w, &cfg).unwrap();
        let ec = eval_en_contour(lambda, t, &w, &spec).unwrap();
        let gc = eval_gn_contour(lambda, t, &w, &spec).unwrap();
        assert!(rel(ec, e) < 1e-10, "E({lambda},{t}) = {ec} vs {e}");
        assert!(rel(gc, g) < 1e-10, "G({lambda},{t}) = {gc} vs {g}");
    }
}

#[test]
fn relaxation_starts_at_one() {
    let cfg = KernelConfig::default();
    for w in [unit(), make_box_weight(0.5, 0.1).unwrap(), make_tapered_weight(0.75, 0.8).unwrap()] {
        let spec = choose_contour(1e-10, 1.0, &w, &cfg).unwrap();
        let e = eval_en_contour(1.0, 1e-10, &w, &spec).unwrap();
        assert!((e - 1.0).abs() < 1e-3, "E(1e-10) = {e}");
    }
}

#[test]
fn narrow_box_approaches_constant_order() {
    let w = make_box_weight(0.5, 0.02).unwrap();
    let cfg = KernelConfig::default();
    let spec = choose_contour(1.0, 1.0, &w, &cfg).unwrap();
    let e = eval_en_contour(1.0, 1.0, &w, &spec).unwrap();
    let g = eval_gn_contour(1.0, 1.0, &w, &spec).unwrap();
    assert!((e - constant_order_relaxation(0.5, 1.0, 1.0).unwrap()).abs() < 2e-2);
    assert!((g - constant_order_response(0.5, 1.0, 1.0).unwrap()).abs() < 2e-2);
    assert!((constant_order_relaxation(0.5, 1.0, 1.0).unwrap() - 0.427_583_576_155_807).abs() < 1e-12);
}

#[test]
fn large_time_uses_reciprocal_radius() {
    let spec = choose_contour(100.0, 1.0, &unit(), &KernelConfig::default()).unwrap();
    assert!((spec.epsilon - 0.01).abs() < 1e-15);
    assert!((spec.theta - 0.75 * PI).abs() < 1e-15);
}

#[test]
fn threshold_reference() {
    // Root of (a − 1)/ln a = 2 at 40 digits.
    assert!((an_threshold(4.0, &unit()).unwrap() - 3.512_862_417_252_339).abs() < 1e-9);
}

#[test]
fn inverse_moment_is_pi() {
    // 1/(sw(s)+λ) = (1/π)∫Φ(r)/(s+r) dr and sw(0+) = 0 give λ∫Φ/r = π.
    let cfg = KernelConfig::default();
    for w in [unit(), make_tapered_weight(0.75, 0.8).unwrap(), make_box_weight(0.4, 0.1).unwrap()] {
        for lambda in [1.0, 37.0, 4096.0] {
            let v = scaled_inverse_moment(lambda, &w, &cfg).unwrap();
            assert!(rel(v, PI) < 1e-8, "{v}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn density_nonnegative(lr in -6.0f64..6.0, ll in -2.0f64..4.0) {
        let phi = spectral_density(10f64.powf(ll), 10f64.powf(lr), &unit()).unwrap();
        prop_assert!(phi >= 0.0);
    }

    #[test]
    fn response_positive_and_relaxation_decreasing(ll in 0.0f64..3.0, lt in -2.0f64..1.0) {
        let (lambda, t) = (10f64.powf(ll), 10f64.powf(lt));
        let w = unit();
        let cfg = KernelConfig::default();
        let g = eval_gn_spectral(lambda, t, &w, &cfg).unwrap();
        prop_assert!(g > 0.0);
        let spec = choose_contour(t, 1.0, &w, &cfg).unwrap();
        let e1 = eval_en_contour(lambda, t, &w, &spec).unwrap();
        let spec2 = choose_contour(1.1 * t, 1.0, &w, &cfg).unwrap();
        let e2 = eval_en_contour(lambda, 1.1 * t, &w, &spec2).unwrap();
        prop_assert!(e2 < e1);
    }

    #[test]
    fn contour_independence(theta in 1.7f64..3.0, shrink in 0.05f64..1.0, lt in -2.0f64..1.0, ll in 0.0f64..2.5) {
        let (lambda, t) = (10f64.powf(ll), 10f64.powf(lt));
        let w = make_box_weight(0.6, 0.2).unwrap();
        let cfg = KernelConfig::default();
        let a = choose_contour(t, 1.0, &w, &cfg).unwrap();
        let b = ContourSpec::new(shrink * a.epsilon, theta, t, &cfg).unwrap();
        let ga = eval_gn_contour(lambda, t, &w, &a).unwrap();
        let gb = eval_gn_contour(lambda, t, &w, &b).unwrap();
        prop_assert!(rel(gb, ga) < 1e-8, "{} vs {}", gb, ga);
    }

    #[test]
    fn threshold_monotone(l1 in 0.1f64..1e3, factor in 1.01f64..10.0) {
        let w = unit();
        prop_assert!(an_threshold(l1, &w).unwrap() < an_threshold(l1 * factor, &w).unwrap());
    }

    #[test]
    fn split_point_irrelevant(ll in 0.0f64..3.5, split in 0.01f64..100.0) {
        let w = make_tapered_weight(0.75, 0.8).unwrap();
        let lambda = 10f64.powf(ll);
        let cfg = KernelConfig::default();
        let (a, b) = inverse_moment_split(lambda, &w, split, &cfg).unwrap();
        let at = an_threshold(lambda, &w).unwrap();
        let (c, d) = inverse_moment_split(lambda, &w, at, &cfg).unwrap();
        prop_assert!(rel(a + b, c + d) < 1e-8);
    }
}
