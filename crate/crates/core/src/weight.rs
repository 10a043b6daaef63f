//! Distributed-order weight μ on [0, 1] and its Laplace symbol
//! w(s) = ∫₀¹ s^{α−1} μ(α) dα.
//!
//! μ is piecewise polynomial; each non-zero piece is one Gauss–Legendre panel,
//! so discontinuities never fall inside a panel. The node table (α_q, W_q μ(α_q))
//! is built once at construction and every symbol evaluation is a plain sum of
//! complex exponentials over it.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, invariant, numeric, Error, Result};
use crate::quadrature::GaussLegendre;

/// Gauss–Legendre order per polynomial piece.
pub const DEFAULT_ALPHA_ORDER: usize = 64;

/// |arg s| beyond which evaluations are considered close to the branch cut.
pub const NEAR_CUT_ARG: f64 = 3.1;

const SAMPLES_PER_PIECE: usize = 257;
const ZERO_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightKind {
    Constant,
    Box,
    Piecewise,
}

/// Key-value form of a weight, as read from and written to config documents.
///
/// `constant` needs only `value` (default 1); `box` needs `alpha0` and `delta`
/// (density 1/δ on [α₀−δ, α₀]); `piecewise` needs `breakpoints` and
/// `coefficients`, one ascending monomial list in (α − left breakpoint) per piece.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightDoc {
    #[serde(rename = "type")]
    pub kind: WeightKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breakpoints: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_at_alpha0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha1: Option<f64>,
}

/// A validated weight function with its concentration certificate (α₀, δ, μ(α₀))
/// and optional upper cutoff α₁.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "WeightDoc", into = "WeightDoc")]
pub struct WeightFunction {
    kind: WeightKind,
    breakpoints: Vec<f64>,
    coefficients: Vec<Vec<f64>>,
    alpha0: f64,
    delta: f64,
    mu_at_alpha0: f64,
    alpha1: Option<f64>,
    sup_norm: f64,
    order: usize,
    table: NodeTable,
}

#[derive(Debug, Clone, Default)]
struct NodeTable {
    /// α_q − 1, so s^{α_q−1} = exp((α_q−1) log s).
    shifted: Vec<f64>,
    /// W_q μ(α_q)
    mass: Vec<f64>,
    sin_pi: Vec<f64>,
    cos_pi: Vec<f64>,
}

impl PartialEq for WeightFunction {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.breakpoints == other.breakpoints
            && self.coefficients == other.coefficients
            && self.alpha0 == other.alpha0
            && self.delta == other.delta
            && self.mu_at_alpha0 == other.mu_at_alpha0
            && self.alpha1 == other.alpha1
    }
}

impl WeightFunction {
    /// Builds and validates a piecewise-polynomial weight.
    pub fn piecewise(
        breakpoints: Vec<f64>,
        coefficients: Vec<Vec<f64>>,
        alpha0: f64,
        delta: f64,
        mu_at_alpha0: Option<f64>,
        alpha1: Option<f64>,
    ) -> Result<Self> {
        Self::build(
            WeightKind::Piecewise,
            breakpoints,
            coefficients,
            alpha0,
            delta,
            mu_at_alpha0,
            alpha1,
        )
    }

    /// μ ≡ value, certified at (α₀, δ).
    pub fn constant(value: f64, alpha0: f64, delta: f64) -> Result<Self> {
        Self::build(
            WeightKind::Constant,
            vec![0.0, 1.0],
            vec![vec![value]],
            alpha0,
            delta,
            Some(value),
            None,
        )
    }

    fn build(
        kind: WeightKind,
        breakpoints: Vec<f64>,
        coefficients: Vec<Vec<f64>>,
        alpha0: f64,
        delta: f64,
        mu_at_alpha0: Option<f64>,
        alpha1: Option<f64>,
    ) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(invariant("breakpoints", "need at least two breakpoints"));
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(invariant("breakpoints", "must start at 0 and end at 1"));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invariant("breakpoints", "must be strictly increasing"));
        }
        if coefficients.len() != breakpoints.len() - 1 {
            return Err(Error::Dimension {
                op: "WeightFunction",
                expected: breakpoints.len() - 1,
                found: coefficients.len(),
            });
        }
        if coefficients
            .iter()
            .any(|c| c.is_empty() || c.iter().any(|v| !v.is_finite()))
        {
            return Err(invariant("coefficients", "each piece needs finite coefficients"));
        }
        if !(alpha0 > 0.0 && alpha0 < 1.0) {
            return Err(invariant("alpha0", format!("alpha0 = {alpha0} not in (0,1)")));
        }
        if !(delta > 0.0 && delta < alpha0) {
            return Err(invariant("delta", format!("delta = {delta} not in (0, alpha0)")));
        }
        let mut w = Self {
            kind,
            breakpoints,
            coefficients,
            alpha0,
            delta,
            mu_at_alpha0: 0.0,
            alpha1,
            sup_norm: 0.0,
            order: DEFAULT_ALPHA_ORDER,
            table: NodeTable::default(),
        };
        w.mu_at_alpha0 = match mu_at_alpha0 {
            Some(v) => v,
            None => w.left_limit(alpha0),
        };
        w.validate()?;
        w.rebuild_table();
        Ok(w)
    }

    /// Same density, different Gauss–Legendre order per piece.
    pub fn with_order(&self, order: usize) -> Self {
        let mut w = self.clone();
        w.order = order.max(1);
        w.rebuild_table();
        w
    }

    /// μ + c on all of [0,1]; the certificate value shifts with it.
    pub fn shifted(&self, c: f64) -> Result<Self> {
        let coefficients = self
            .coefficients
            .iter()
            .map(|p| {
                let mut p = p.clone();
                p[0] += c;
                p
            })
            .collect();
        let alpha1 = if c == 0.0 { self.alpha1 } else { None };
        let mut w = Self::build(
            WeightKind::Piecewise,
            self.breakpoints.clone(),
            coefficients,
            self.alpha0,
            self.delta,
            Some(self.mu_at_alpha0 + c),
            alpha1,
        )?;
        w.order = self.order;
        w.rebuild_table();
        Ok(w)
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }
    pub fn coefficients(&self) -> &[Vec<f64>] {
        &self.coefficients
    }
    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn mu_at_alpha0(&self) -> f64 {
        self.mu_at_alpha0
    }
    pub fn alpha1(&self) -> Option<f64> {
        self.alpha1
    }
    /// ‖μ‖_{L∞(0,1)}
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }
    pub fn order(&self) -> usize {
        self.order
    }

    fn piece_value(&self, piece: usize, alpha: f64) -> f64 {
        let xi = alpha - self.breakpoints[piece];
        self.coefficients[piece]
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * xi + c)
    }

    fn piece_index(&self, alpha: f64) -> usize {
        // Right-continuous: a breakpoint belongs to the piece on its right.
        let n = self.coefficients.len();
        match self.breakpoints[1..n].iter().position(|&b| alpha < b) {
            Some(i) => i,
            None => n - 1,
        }
    }

    fn left_limit(&self, alpha: f64) -> f64 {
        let n = self.coefficients.len();
        let i = self.breakpoints[1..=n]
            .iter()
            .position(|&b| alpha <= b)
            .unwrap_or(n - 1);
        self.piece_value(i, alpha)
    }

    /// μ(α), right limit at breakpoints.
    pub fn eval_mu(&self, alpha: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(domain("eval_mu", format!("alpha = {alpha} outside [0,1]")));
        }
        Ok(self.piece_value(self.piece_index(alpha), alpha))
    }

    fn samples(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.coefficients.len()).flat_map(move |p| {
            let (a, b) = (self.breakpoints[p], self.breakpoints[p + 1]);
            (0..=SAMPLES_PER_PIECE).map(move |k| (p, a + (b - a) * k as f64 / SAMPLES_PER_PIECE as f64))
        })
    }

    fn validate(&mut self) -> Result<()> {
        let mut sup: f64 = 0.0;
        for (p, alpha) in self.samples() {
            let v = self.piece_value(p, alpha);
            if v < -ZERO_TOL {
                return Err(invariant(
                    "mu_nonnegative",
                    format!("mu({alpha}) = {v} < 0"),
                ));
            }
            sup = sup.max(v.abs());
        }
        self.sup_norm = sup;
        if !(self.mu_at_alpha0 > 0.0) {
            return Err(invariant(
                "concentration",
                format!("mu(alpha0) = {} must be positive", self.mu_at_alpha0),
            ));
        }
        let (lo, hi) = (self.alpha0 - self.delta, self.alpha0);
        let n = 4 * SAMPLES_PER_PIECE;
        for k in 1..n {
            let alpha = lo + (hi - lo) * k as f64 / n as f64;
            let v = self.eval_mu(alpha)?;
            if v < 0.5 * self.mu_at_alpha0 * (1.0 - 1e-12) {
                return Err(invariant(
                    "concentration",
                    format!(
                        "mu({alpha}) = {v} < mu(alpha0)/2 = {} on (alpha0-delta, alpha0)",
                        0.5 * self.mu_at_alpha0
                    ),
                ));
            }
        }
        if self.mu_at_alpha0 > self.sup_norm * (1.0 + 1e-12) {
            self.sup_norm = self.mu_at_alpha0;
        }
        if let Some(a1) = self.alpha1 {
            if !(a1 > self.alpha0 && a1 < 1.0) {
                return Err(invariant("cutoff", format!("alpha1 = {a1} not in (alpha0, 1)")));
            }
            for (p, alpha) in self.samples() {
                if alpha > a1 && alpha < 1.0 {
                    let v = self.piece_value(p, alpha);
                    if v.abs() > ZERO_TOL {
                        return Err(invariant(
                            "cutoff",
                            format!("mu({alpha}) = {v} != 0 above alpha1 = {a1}"),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    fn rebuild_table(&mut self) {
        let rule = GaussLegendre::cached(self.order);
        let mut t = NodeTable::default();
        for p in 0..self.coefficients.len() {
            if self.coefficients[p].iter().all(|&c| c == 0.0) {
                continue;
            }
            let (a, b) = (self.breakpoints[p], self.breakpoints[p + 1]);
            for (alpha, wq) in rule.mapped(a, b) {
                let m = wq * self.piece_value(p, alpha);
                t.shifted.push(alpha - 1.0);
                t.mass.push(m);
                t.sin_pi.push((PI * alpha).sin());
                t.cos_pi.push((PI * alpha).cos());
            }
        }
        self.table = t;
    }

    /// w(s) on the principal branch; s must avoid (−∞, 0].
    pub fn eval_w(&self, s: Complex64) -> Result<Complex64> {
        check_off_cut("eval_w", s)?;
        Ok(self.w_unchecked(s.ln()))
    }

    /// s·w(s) = ∫₀¹ s^α μ(α) dα.
    pub fn eval_sw(&self, s: Complex64) -> Result<Complex64> {
        check_off_cut("eval_sw", s)?;
        Ok(s * self.w_unchecked(s.ln()))
    }

    /// (w(s), s·w(s)) from log s, no domain check.
    pub(crate) fn symbol_from_log(&self, log_s: Complex64) -> (Complex64, Complex64) {
        let w = self.w_unchecked(log_s);
        (w, log_s.exp() * w)
    }

    fn w_unchecked(&self, log_s: Complex64) -> Complex64 {
        let t = &self.table;
        let (mut re, mut im) = (0.0, 0.0);
        for (&a, &m) in t.shifted.iter().zip(&t.mass) {
            let mag = m * (a * log_s.re).exp();
            let (sn, cs) = (a * log_s.im).sin_cos();
            re += mag * cs;
            im += mag * sn;
        }
        Complex64::new(re, im)
    }

    /// (N(r), D(r)) = (∫ r^α sin πα μ, ∫ r^α cos πα μ) from ln r.
    pub(crate) fn cut_moments(&self, ln_r: f64) -> (f64, f64) {
        let t = &self.table;
        let (mut n, mut d) = (0.0, 0.0);
        for i in 0..t.mass.len() {
            let v = t.mass[i] * ((t.shifted[i] + 1.0) * ln_r).exp();
            n += v * t.sin_pi[i];
            d += v * t.cos_pi[i];
        }
        (n, d)
    }

    /// ∫₀¹ a^α μ(α) dα from ln a.
    pub(crate) fn power_moment(&self, ln_a: f64) -> f64 {
        let t = &self.table;
        t.shifted
            .iter()
            .zip(&t.mass)
            .map(|(&s, &m)| m * ((s + 1.0) * ln_a).exp())
            .sum()
    }

    pub fn to_doc(&self) -> WeightDoc {
        WeightDoc {
            kind: self.kind,
            value: None,
            breakpoints: Some(self.breakpoints.clone()),
            coefficients: Some(self.coefficients.clone()),
            alpha0: Some(self.alpha0),
            delta: Some(self.delta),
            mu_at_alpha0: Some(self.mu_at_alpha0),
            alpha1: self.alpha1,
        }
    }

    pub fn from_doc(doc: &WeightDoc) -> Result<Self> {
        if let (Some(b), Some(c)) = (&doc.breakpoints, &doc.coefficients) {
            let alpha0 = doc.alpha0.ok_or_else(|| missing("alpha0"))?;
            let delta = doc.delta.ok_or_else(|| missing("delta"))?;
            return Self::build(
                doc.kind,
                b.clone(),
                c.clone(),
                alpha0,
                delta,
                doc.mu_at_alpha0,
                doc.alpha1,
            );
        }
        match doc.kind {
            WeightKind::Constant => {
                let w = Self::constant(
                    doc.value.unwrap_or(1.0),
                    doc.alpha0.unwrap_or(0.5),
                    doc.delta.unwrap_or(0.25),
                )?;
                if doc.alpha1.is_some() {
                    return Err(invariant("cutoff", "a constant weight has no cutoff"));
                }
                Ok(w)
            }
            WeightKind::Box => make_box_weight(
                doc.alpha0.ok_or_else(|| missing("alpha0"))?,
                doc.delta.ok_or_else(|| missing("delta"))?,
            ),
            WeightKind::Piecewise => Err(missing("breakpoints/coefficients")),
        }
    }
}

fn missing(key: &str) -> Error {
    Error::Config {
        key: format!("weight.{key}"),
        detail: "required field missing".into(),
    }
}

impl TryFrom<WeightDoc> for WeightFunction {
    type Error = Error;
    fn try_from(doc: WeightDoc) -> Result<Self> {
        Self::from_doc(&doc)
    }
}

impl From<WeightFunction> for WeightDoc {
    fn from(w: WeightFunction) -> Self {
        w.to_doc()
    }
}

fn check_off_cut(op: &'static str, s: Complex64) -> Result<()> {
    if !(s.re.is_finite() && s.im.is_finite()) || (s.im == 0.0 && s.re <= 0.0) {
        return Err(domain(op, format!("s = {s} lies on the cut (-inf, 0]")));
    }
    Ok(())
}

/// True when s sits within `π − NEAR_CUT_ARG` of the negative axis.
pub fn near_cut(s: Complex64) -> bool {
    s.arg().abs() > NEAR_CUT_ARG
}

/// μ = (1/h)·1_{[α₀−h, α₀]}, certified with δ = h and μ(α₀) = 1/h.
pub fn make_box_weight(alpha0: f64, h: f64) -> Result<WeightFunction> {
    if !(h > 0.0 && h < alpha0 && alpha0 < 1.0) {
        return Err(domain(
            "make_box_weight",
            format!("need 0 < h < alpha0 < 1, got alpha0 = {alpha0}, h = {h}"),
        ));
    }
    WeightFunction::build(
        WeightKind::Box,
        vec![0.0, alpha0 - h, alpha0, 1.0],
        vec![vec![0.0], vec![1.0 / h], vec![0.0]],
        alpha0,
        h,
        Some(1.0 / h),
        None,
    )
}

/// μ = 1 on [0, plateau_end], linear down to 0 at `cutoff`, 0 beyond; the
/// cutoff is recorded as α₁. Certified at α₀ = plateau_end/2 with δ = α₀.
pub fn make_tapered_weight(plateau_end: f64, cutoff: f64) -> Result<WeightFunction> {
    if !(plateau_end > 0.0 && plateau_end < cutoff && cutoff < 1.0) {
        return Err(domain(
            "make_tapered_weight",
            format!("need 0 < plateau_end < cutoff < 1, got {plateau_end}, {cutoff}"),
        ));
    }
    let alpha0 = 0.5 * plateau_end;
    WeightFunction::piecewise(
        vec![0.0, plateau_end, cutoff, 1.0],
        vec![vec![1.0], vec![1.0, -1.0 / (cutoff - plateau_end)], vec![0.0]],
        alpha0,
        0.5 * alpha0,
        Some(1.0),
        Some(cutoff),
    )
}

/// ζ(r) = (r − 1)/log r, ζ(1) = 1.
pub fn zeta_env(r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(domain("zeta_env", format!("r = {r} must be positive")));
    }
    let x = r - 1.0;
    if x.abs() < 1e-6 {
        return Ok(1.0 + x / 2.0 - x * x / 12.0 + x * x * x / 24.0);
    }
    Ok(x / r.ln())
}

/// ϑ(r) = ζ(r)/r.
pub fn vartheta_env(r: f64) -> Result<f64> {
    Ok(zeta_env(r)? / r)
}

/// Inverse of the increasing map ζ by bisection in log r.
pub fn zeta_inverse(y: f64) -> Result<f64> {
    if !(y > 0.0) || !y.is_finite() {
        return Err(domain("zeta_inverse", format!("y = {y} must be positive")));
    }
    let (mut lo, mut hi) = ((1e-12f64).ln(), (1e12f64).ln());
    // ζ(0+) = 0 and ζ(∞) = ∞; widen the bracket until it straddles y.
    let z = |u: f64| zeta_env(u.exp()).unwrap_or(f64::NAN);
    const LOG_LIMIT: f64 = 700.0;
    while z(lo) > y {
        if lo <= -LOG_LIMIT {
            return Err(numeric("zeta_inverse", format!("no bracket for y = {y}")));
        }
        lo = (2.0 * lo).max(-LOG_LIMIT);
    }
    while z(hi) < y {
        if hi >= LOG_LIMIT {
            return Err(numeric("zeta_inverse", format!("no bracket for y = {y}")));
        }
        hi = (2.0 * hi).min(LOG_LIMIT);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if z(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * mid.abs().max(1.0) {
            break;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// Worst slack per inequality over a sample set; negative slack is a violation.
///
/// Slacks are relative: (value − bound)/bound for lower bounds and
/// (bound − value)/bound for upper bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolBoundReport {
    pub samples: usize,
    /// |sw(s)+λ| ≥ C_β λ
    pub resolvent_floor: f64,
    /// λ^ν |sw|^{1−ν} / |sw+λ| ≤ 2/sin β, β ∈ (π/2, π), ν ∈ {0, ¼, ½, ¾, 1}
    pub interpolated: f64,
    /// |sw(s)+λ| ≥ C min(|s|^{α₀−δ}, |s|^{α₀})
    pub concentration_floor: f64,
    /// |sw(s)| ≤ ‖μ‖∞ ζ(|s|)
    pub envelope_sw: f64,
    /// |w(s)| ≤ ‖μ‖∞ ϑ(|s|)
    pub envelope_w: f64,
    pub near_cut_samples: usize,
}

/// Slack below −VIOLATION_TOL counts as a violation (round-off allowance).
pub const VIOLATION_TOL: f64 = 1e-12;

impl SymbolBoundReport {
    pub fn slacks(&self) -> [(&'static str, f64); 5] {
        [
            ("resolvent_floor", self.resolvent_floor),
            ("interpolated", self.interpolated),
            ("concentration_floor", self.concentration_floor),
            ("envelope_sw", self.envelope_sw),
            ("envelope_w", self.envelope_w),
        ]
    }

    pub fn violations(&self) -> usize {
        self.slacks()
            .iter()
            .filter(|(_, s)| *s < -VIOLATION_TOL)
            .count()
    }
}

/// Constant of the resolvent floor for |arg s| = β.
pub fn resolvent_floor_constant(beta: f64) -> f64 {
    if beta <= PI / 2.0 {
        1.0
    } else {
        beta.sin() / 2.0
    }
}

/// Constant of the concentration floor, per half-plane branch.
pub fn concentration_floor_constant(w: &WeightFunction, beta: f64) -> f64 {
    let (a0, d) = (w.alpha0, w.delta);
    let base = d * w.mu_at_alpha0 / 2.0;
    if beta <= PI / 2.0 {
        base * (a0 * PI / 2.0).cos()
    } else {
        base * ((a0 - d) * PI / 2.0).sin().min((a0 * PI).sin())
    }
}

pub fn check_symbol_bounds(
    w: &WeightFunction,
    samples: &[(Complex64, f64)],
) -> Result<SymbolBoundReport> {
    let mut rep = SymbolBoundReport {
        samples: samples.len(),
        resolvent_floor: f64::INFINITY,
        interpolated: f64::INFINITY,
        concentration_floor: f64::INFINITY,
        envelope_sw: f64::INFINITY,
        envelope_w: f64::INFINITY,
        near_cut_samples: 0,
    };
    let sup = w.sup_norm;
    for &(s, lambda) in samples {
        if !(lambda > 0.0) {
            return Err(domain("check_symbol_bounds", format!("lambda = {lambda} must be positive")));
        }
        let wv = w.eval_w(s)?;
        let sw = s * wv;
        if near_cut(s) {
            rep.near_cut_samples += 1;
        }
        let beta = s.arg().abs();
        let r = s.norm();
        let res = (sw + lambda).norm();

        let floor = resolvent_floor_constant(beta) * lambda;
        rep.resolvent_floor = rep.resolvent_floor.min((res - floor) / floor);

        if beta > PI / 2.0 && beta < PI {
            let bound = 2.0 / beta.sin();
            let swn = sw.norm();
            for nu in [0.0, 0.25, 0.5, 0.75, 1.0] {
                let v = lambda.powf(nu) * swn.powf(1.0 - nu) / res;
                rep.interpolated = rep.interpolated.min((bound - v) / bound);
            }
        }

        let c = concentration_floor_constant(w, beta);
        let cfloor = c * r.powf(w.alpha0 - w.delta).min(r.powf(w.alpha0));
        if cfloor > 0.0 {
            rep.concentration_floor = rep.concentration_floor.min((res - cfloor) / cfloor);
        }

        let env_sw = sup * zeta_env(r)?;
        rep.envelope_sw = rep.envelope_sw.min((env_sw - sw.norm()) / env_sw);
        let env_w = sup * vartheta_env(r)?;
        rep.envelope_w = rep.envelope_w.min((env_w - wv.norm()) / env_w);
    }
    Ok(rep)
}

/// Fixed-seed sweep: log10|s| ∈ [−6, 6], arg s ∈ (−π, π) avoiding the cut by
/// 1e−3, log10 λ ∈ [−3, 6].
pub fn random_symbol_samples(count: usize, seed: u64) -> Vec<(Complex64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let r = 10f64.powf(rng.gen_range(-6.0..6.0));
            let beta = rng.gen_range(0.0..(PI - 1e-3));
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let lambda = 10f64.powf(rng.gen_range(-3.0..6.0));
            (Complex64::from_polar(r, sign * beta), lambda)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> WeightFunction {
        WeightFunction::constant(1.0, 0.5, 0.25).unwrap()
    }

    #[test]
    fn eval_mu_examples() {
        assert_eq!(unit().eval_mu(0.5).unwrap(), 1.0);
        let b = WeightFunction::piecewise(
            vec![0.0, 0.25, 0.75, 1.0],
            vec![vec![0.0], vec![2.0], vec![0.0]],
            0.5,
            0.2,
            None,
            None,
        )
        .unwrap();
        assert_eq!(b.eval_mu(0.1).unwrap(), 0.0);
        assert_eq!(b.eval_mu(0.5).unwrap(), 2.0);
        // right limit at a breakpoint
        assert_eq!(b.eval_mu(0.25).unwrap(), 2.0);
        assert_eq!(b.eval_mu(0.75).unwrap(), 0.0);
        assert!(b.eval_mu(1.5).is_err());
        assert!(b.eval_mu(-0.1).is_err());
    }

    #[test]
    fn symbol_closed_forms() {
        let w = unit();
        let v = w.eval_w(Complex64::new(1.0, 0.0)).unwrap();
        assert!((v.re - 1.0).abs() < 1e-15 && v.im.abs() < 1e-15);
        let v = w.eval_w(Complex64::new(2.0, 0.0)).unwrap();
        assert!((v.re - 1.0 / (2.0 * 2f64.ln())).abs() < 1e-14);
        let v = w.eval_sw(Complex64::new(2.0, 0.0)).unwrap();
        assert!((v.re - std::f64::consts::LOG2_E).abs() < 1e-14);
        assert!(w.eval_w(Complex64::new(-1.0, 0.0)).is_err());
        assert!(w.eval_w(Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn box_weight_normalised() {
        let b = make_box_weight(0.5, 0.1).unwrap();
        assert!((b.eval_mu(0.45).unwrap() - 10.0).abs() < 1e-12);
        assert_eq!(b.eval_mu(0.3).unwrap(), 0.0);
        let v = b.eval_w(Complex64::new(1.0, 0.0)).unwrap();
        assert!((v.re - 1.0).abs() < 1e-13);
        assert!(make_box_weight(0.5, 0.6).is_err());
        assert!(make_box_weight(1.0, 0.1).is_err());
    }

    #[test]
    fn box_weight_closed_form_symbol() {
        let b = make_box_weight(0.5, 0.05).unwrap();
        let r: f64 = 4.0;
        let exact = r.powf(0.5) * (1.0 - r.powf(-0.05)) / (0.05 * r.ln());
        let v = b.eval_sw(Complex64::new(r, 0.0)).unwrap();
        assert!((v.re - exact).abs() < 1e-13 * exact);
    }

    #[test]
    fn zeta_examples() {
        assert_eq!(zeta_env(1.0).unwrap(), 1.0);
        assert!((zeta_env(std::f64::consts::E).unwrap() - 1.718_281_828_459_045).abs() < 1e-14);
        assert!((vartheta_env(2.0).unwrap() - 0.721_347_520_444_481_7).abs() < 1e-14);
        assert!(zeta_env(0.0).is_err());
        assert!(zeta_env(-1.0).is_err());
        // continuity across the series switch
        let a = zeta_env(1.0 + 0.99e-6).unwrap();
        let b = zeta_env(1.0 + 1.01e-6).unwrap();
        assert!((a - b).abs() < 1e-8);
    }

    #[test]
    fn zeta_inverse_roundtrip() {
        for y in [0.002, 0.0125, 0.5, 1.0, 2.0, 1e3] {
            let r = zeta_inverse(y).unwrap();
            assert!((zeta_env(r).unwrap() - y).abs() < 1e-10 * y, "y={y}");
        }
        // the preimage of 1e-4 is e^{-10000}, below the smallest double
        assert!(zeta_inverse(1e-4).is_err());
    }

    #[test]
    fn concentration_condition_rejected() {
        // zero on (0.3, 0.5): cannot certify alpha0 = 0.5, delta = 0.25
        let r = WeightFunction::piecewise(
            vec![0.0, 0.3, 0.5, 1.0],
            vec![vec![1.0], vec![0.0], vec![1.0]],
            0.5,
            0.25,
            Some(1.0),
            None,
        );
        match r {
            Err(Error::Invariant { invariant, .. }) => assert_eq!(invariant, "concentration"),
            other => panic!("expected concentration violation, got {other:?}"),
        }
    }

    #[test]
    fn negative_density_and_cutoff_rejected() {
        let r = WeightFunction::piecewise(vec![0.0, 1.0], vec![vec![1.0, -2.0]], 0.4, 0.2, None, None);
        assert!(matches!(r, Err(Error::Invariant { invariant: "mu_nonnegative", .. })));
        let r = WeightFunction::piecewise(vec![0.0, 1.0], vec![vec![1.0]], 0.5, 0.2, None, Some(0.8));
        assert!(matches!(r, Err(Error::Invariant { invariant: "cutoff", .. })));
    }

    #[test]
    fn symbol_bound_examples() {
        let w = unit();
        let rep = check_symbol_bounds(&w, &[(Complex64::new(2.0, 0.0), 1.0)]).unwrap();
        assert!((rep.resolvent_floor - std::f64::consts::LOG2_E).abs() < 1e-12);
        let s = Complex64::from_polar(1.0, 3.0 * PI / 4.0);
        let rep = check_symbol_bounds(&w, &[(s, 1.0)]).unwrap();
        assert!(rep.resolvent_floor > 0.0);
        assert!((resolvent_floor_constant(3.0 * PI / 4.0) - 0.353_553_390_593_273_8).abs() < 1e-15);
    }

    #[test]
    fn symbol_bounds_hold_on_sweep() {
        let w = unit();
        let rep = check_symbol_bounds(&w, &random_symbol_samples(2000, 7)).unwrap();
        assert_eq!(rep.violations(), 0, "{rep:?}");
    }

    #[test]
    fn doc_roundtrip() {
        let b = make_box_weight(0.5, 0.1).unwrap();
        let text = toml::to_string(&b).unwrap();
        let back: WeightFunction = toml::from_str(&text).unwrap();
        assert_eq!(b, back);
    }
}
