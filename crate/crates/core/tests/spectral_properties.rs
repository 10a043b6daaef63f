use std::f64::consts::PI;

use proptest::prelude::*;
use ultraslow::spectral::{build_exact_dirichlet_on, build_fd, fractional_norm, EllipticCoefficients, Polynomial};

// Eigenvalues of −((1 + x/2)u')' on (0, π), Dirichlet, from Chebyshev
// collocation (stable to ~1e-13 across 48, 64, 80 points).
const VARIABLE_A: [f64; 5] = [1.684_962_227_097_5, 6.767_879_604_313, 15.239_752_708_826, 27.100_425_111_413, 42.349_875_158_097];

fn variable() -> EllipticCoefficients {
    EllipticCoefficients::new(Polynomial(vec![1.0, 0.5]), Polynomial::constant(0.0), 1.0, PI).unwrap()
}

#[test]
fn variable_coefficient_richardson() {
    let c = variable();
    let l: Vec<Vec<f64>> = [501, 1001, 2001].iter().map(|&m| build_fd(&c, m, 5).unwrap().eigenvalues().to_vec()).collect();
    for n in 0..5 {
        let order = ((l[0][n] - l[1][n]) / (l[1][n] - l[2][n])).log2();
        assert!((order - 2.0).abs() < 0.05, "mode {n}: observed order {order}");
        let extrapolated = l[2][n] + (l[2][n] - l[1][n]) / 3.0;
        assert!((extrapolated - VARIABLE_A[n]).abs() < 1e-8 * VARIABLE_A[n], "mode {n}: {extrapolated}");
        assert!((l[2][n] - VARIABLE_A[n]).abs() < 1e-5 * VARIABLE_A[n]);
    }
}

#[test]
fn parabola_sine_coefficients() {
    let b = build_exact_dirichlet_on(PI, 5, 4001).unwrap();
    let f: Vec<f64> = b.grid().iter().map(|x| x * (PI - x)).collect();
    let c = b.project(&f).unwrap();
    for (i, ci) in c.iter().enumerate() {
        let n = (i + 1) as f64;
        let exact = if (i + 1) % 2 == 1 { 8.0 / (PI * n.powi(3)) * (PI / 2.0).sqrt() } else { 0.0 };
        assert!((ci - exact).abs() < 1e-6, "n = {n}: {ci} vs {exact}");
    }
}

fn arb_coeffs() -> impl Strategy<Value = EllipticCoefficients> {
    (0.0f64..1.0, 0.0f64..0.3, 0.0f64..2.0, 0.5f64..4.0).prop_map(|(a1, a2, q0, len)| {
        EllipticCoefficients::new(Polynomial(vec![1.0, a1, a2]), Polynomial(vec![q0, 0.1]), 1.0, len).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fd_basis_invariants(c in arb_coeffs(), m in 41usize..161) {
        let b = build_fd(&c, m, 12).unwrap();
        prop_assert!(b.orthonormality_defect() <= 1e-8);
        prop_assert!(b.eigenvalues().windows(2).all(|p| p[0] <= p[1]));
        prop_assert!(b.eigenvalue(0) >= b.floor());
    }

    #[test]
    fn synthesize_project_round_trip(c in arb_coeffs(), coeffs in prop::collection::vec(-2.0f64..2.0, 10)) {
        let b = build_fd(&c, 121, 10).unwrap();
        let f = b.synthesize(&coeffs).unwrap();
        let back = b.project(&f).unwrap();
        let again = b.synthesize(&back).unwrap();
        for (x, y) in f.iter().zip(&again) {
            prop_assert!((x - y).abs() <= 1e-8);
        }
    }

    #[test]
    fn potential_shift_moves_spectrum(c in arb_coeffs(), shift in 0.0f64..5.0) {
        let shifted = EllipticCoefficients::new(c.a.clone(), c.q.add(&Polynomial::constant(shift)), c.c_a, c.length).unwrap();
        let a = build_fd(&c, 81, 6).unwrap();
        let b = build_fd(&shifted, 81, 6).unwrap();
        for (x, y) in a.eigenvalues().iter().zip(b.eigenvalues()) {
            prop_assert!((y - x - shift).abs() <= 1e-9 * y);
        }
    }

    #[test]
    fn fractional_norm_monotone_in_kappa(coeffs in prop::collection::vec(-1.0f64..1.0, 8), k1 in 0.0f64..1.0, k2 in 0.0f64..1.0) {
        // λ_n ≥ 1, so the D(A^κ) norm grows with κ.
        let eig: Vec<f64> = (1..=8).map(|n| (n * n) as f64).collect();
        let (lo, hi) = if k1 < k2 { (k1, k2) } else { (k2, k1) };
        let a = fractional_norm(&eig, &coeffs, lo).unwrap();
        let b = fractional_norm(&eig, &coeffs, hi).unwrap();
        prop_assert!(a <= b * (1.0 + 1e-14));
    }
}
