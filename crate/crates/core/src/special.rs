//! Mittag-Leffler function E_{α,β}(z) for real z ≤ 0 and α ∈ (0, 1].
//!
//! Three regimes, chosen on the scale x^{1/α} with x = |z|:
//! - power series Σ z^k / Γ(αk+β) while the largest term stays below ~e^3
//!   (larger terms amplify the ~1e−13 relative error of Γ),
//! - the algebraic asymptotic expansion −Σ z^{−k} / Γ(β−αk) once its optimally
//!   truncated remainder drops below 1e−15 relative (x^{1/α} ≥ 40),
//! - otherwise the real-axis Laplace-inversion integral
//!   E_{α,β}(−x) = (1/π) ∫₀^∞ e^{−ρ} ρ^{α−β} [ρ^α sin πβ + x sin π(β−α)]
//!   / (ρ^{2α} + 2xρ^α cos πα + x²) dρ, valid for 0 < β ≤ 1; other β are
//!   reduced with E_{α,β}(z) = 1/Γ(β) + z E_{α,α+β}(z).

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use crate::error::{domain, Result};
use crate::quadrature::GaussLegendre;

/// Largest x^{1/α} for which the power series is used.
pub(crate) const SERIES_SCALE_LIMIT: f64 = 3.0;
const ASYMPTOTIC_REL_TOL: f64 = 1e-15;
/// The optimally truncated remainder is of order e^{−x^{1/α}}.
const ASYMPTOTIC_SCALE_MIN: f64 = 40.0;

/// 1/Γ(x), zero at the poles.
pub fn recip_gamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if x > 171.0 {
        return 0.0;
    }
    1.0 / gamma(x)
}

/// E_{α,β}(z) for α ∈ (0,1], real β, real z ≤ 0.
///
/// For α = 1 with non-integer β only |z| ≤ 30 is supported.
pub fn mittag_leffler(alpha: f64, beta: f64, z: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(domain("mittag_leffler", format!("alpha = {alpha} not in (0,1]")));
    }
    if !beta.is_finite() {
        return Err(domain("mittag_leffler", format!("beta = {beta} not finite")));
    }
    if !(z <= 0.0) || !z.is_finite() {
        return Err(domain("mittag_leffler", format!("z = {z} must be finite and <= 0")));
    }
    let x = -z;
    if x == 0.0 {
        return Ok(recip_gamma(beta));
    }
    if alpha == 1.0 {
        return ml_alpha_one(beta, z);
    }
    let scale = x.powf(1.0 / alpha);
    if scale <= SERIES_SCALE_LIMIT {
        return Ok(ml_series(alpha, beta, z));
    }
    if scale >= ASYMPTOTIC_SCALE_MIN {
        if let Some(v) = ml_asymptotic(alpha, beta, z) {
            return Ok(v);
        }
    }
    Ok(ml_integral(alpha, beta, z))
}

fn ml_alpha_one(beta: f64, z: f64) -> Result<f64> {
    let x = -z;
    if beta == 1.0 {
        return Ok(z.exp());
    }
    if x <= SERIES_SCALE_LIMIT {
        return Ok(ml_series(1.0, beta, z));
    }
    if beta == beta.floor() {
        // E_{1,1} = e^z, then E_{1,b+1} = (E_{1,b} − 1/Γ(b))/z; no cancellation for |z| > 10.
        let target = beta as i64;
        let mut b = 1i64;
        let mut val = z.exp();
        if target >= 1 {
            while b < target {
                val = (val - recip_gamma(b as f64)) / z;
                b += 1;
            }
        } else {
            while b > target {
                b -= 1;
                val = recip_gamma(b as f64) + z * val;
            }
        }
        return Ok(val);
    }
    if x <= 30.0 {
        return Ok(ml_series(1.0, beta, z));
    }
    Err(domain(
        "mittag_leffler",
        format!("alpha = 1 with non-integer beta = {beta} requires |z| <= 30, got {x}"),
    ))
}

/// Power series with compensated summation.
pub(crate) fn ml_series(alpha: f64, beta: f64, z: f64) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut zk = 1.0;
    for k in 0..2000 {
        let term = zk * recip_gamma(alpha * k as f64 + beta);
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if k > 4 && term.abs() <= 1e-17 * sum.abs().max(1e-300) && alpha * k as f64 + beta > 1.0 {
            break;
        }
        zk *= z;
        if !zk.is_finite() {
            break;
        }
    }
    sum
}

/// Optimally truncated asymptotic expansion; `None` when the smallest term
/// is not below the relative tolerance.
pub(crate) fn ml_asymptotic(alpha: f64, beta: f64, z: f64) -> Option<f64> {
    let mut sum: f64 = 0.0;
    let mut smallest = f64::INFINITY;
    let inv = 1.0 / z;
    let mut zk = 1.0;
    let mut quiet = 0;
    for k in 1..600 {
        zk *= inv;
        let arg = beta - alpha * k as f64;
        // 1/Γ vanishes at non-positive integers; round-off in `arg` must not
        // turn a pole into a spuriously tiny term.
        if arg <= 0.0 && (arg - arg.round()).abs() < 1e-9 {
            continue;
        }
        let rg = recip_gamma(arg);
        let term = -zk * rg;
        // Past the optimal truncation point the terms grow without bound.
        if term.abs() > 1e3 * smallest {
            break;
        }
        sum += term;
        smallest = smallest.min(term.abs());
        if term.abs() <= 1e-17 * sum.abs() {
            quiet += 1;
            if quiet >= 3 {
                return Some(sum);
            }
        } else {
            quiet = 0;
        }
    }
    (smallest <= ASYMPTOTIC_REL_TOL * sum.abs()).then_some(sum)
}

/// Real-axis inversion integral, with β reduced into (0, 1].
pub(crate) fn ml_integral(alpha: f64, beta: f64, z: f64) -> f64 {
    if beta > 1.0 {
        let lower = beta - alpha;
        return (ml_integral(alpha, lower, z) - recip_gamma(lower)) / z;
    }
    if beta <= 0.0 {
        return recip_gamma(beta) + z * ml_integral(alpha, beta + alpha, z);
    }
    let x = -z;
    let (sin_b, sin_ba, cos_a) = (
        (PI * beta).sin(),
        (PI * (beta - alpha)).sin(),
        (PI * alpha).cos(),
    );
    // Integrand in u = ln ρ (one factor ρ from dρ = ρ du).
    let f = |u: f64| -> f64 {
        let rho = u.exp();
        let ra = (alpha * u).exp();
        let num = ra * sin_b + x * sin_ba;
        let den = ra * ra + 2.0 * x * ra * cos_a + x * x;
        (-rho).exp() * ((alpha - beta + 1.0) * u).exp() * num / den
    };
    let power = alpha - beta + 1.0;
    let rho_lo = (1e-8f64).min((1e-6 * x).powf(1.0 / alpha));
    let u_lo = rho_lo.ln();
    let u_hi = 45f64.ln();
    let rule = GaussLegendre::cached(20);
    let width = 0.25;
    let panels = ((u_hi - u_lo) / width).ceil() as usize;
    let h = (u_hi - u_lo) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let a = u_lo + p as f64 * h;
        total += rule.integrate(a, a + h, f);
    }
    // Below u_lo the integrand behaves like C e^{power·u}.
    total += f(u_lo) / power;
    total / PI
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_identity() {
        let v = mittag_leffler(1.0, 1.0, -1.0).unwrap();
        assert!((v - 0.367_879_441_171_442_3).abs() < 1e-15);
        let v = mittag_leffler(1.0, 2.0, -20.0).unwrap();
        let exact = ((-20f64).exp() - 1.0) / -20.0;
        assert!((v - exact).abs() < 1e-15);
    }

    #[test]
    fn value_at_zero_is_reciprocal_gamma() {
        let v = mittag_leffler(0.5, 0.5, 0.0).unwrap();
        assert!((v - 0.564_189_583_547_756_3).abs() < 1e-14);
    }

    #[test]
    fn domain_errors() {
        assert!(mittag_leffler(0.0, 1.0, -1.0).is_err());
        assert!(mittag_leffler(1.2, 1.0, -1.0).is_err());
        assert!(mittag_leffler(0.5, 1.0, 0.5).is_err());
        assert!(mittag_leffler(0.5, f64::NAN, -1.0).is_err());
        assert!(mittag_leffler(1.0, 0.5, -100.0).is_err());
    }

    #[test]
    fn series_and_integral_agree_at_switchover() {
        for alpha in [0.2, 0.35, 0.5, 0.7, 0.9, 0.95] {
            for beta in [alpha, 1.0, 1.0 + alpha, 0.3] {
                let x = SERIES_SCALE_LIMIT.powf(alpha);
                let s = ml_series(alpha, beta, -x);
                let i = ml_integral(alpha, beta, -x);
                assert!((s - i).abs() < 1e-9, "a={alpha} b={beta} series={s} integral={i}");
            }
        }
    }

    #[test]
    fn asymptotic_and_integral_agree_where_accepted() {
        for alpha in [0.2, 0.5, 0.7, 0.9] {
            for beta in [alpha, 1.0, 1.0 + alpha] {
                for x in [5.0f64, 10.0, 30.0, 100.0, 1000.0] {
                    if x.powf(1.0 / alpha) < ASYMPTOTIC_SCALE_MIN {
                        continue;
                    }
                    if let Some(a) = ml_asymptotic(alpha, beta, -x) {
                        let i = ml_integral(alpha, beta, -x);
                        assert!(
                            (a - i).abs() < 1e-9 * i.abs().max(1e-3),
                            "a={alpha} b={beta} x={x} asym={a} integral={i}"
                        );
                    }
                }
            }
        }
    }
}
