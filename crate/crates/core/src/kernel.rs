//! Per-mode relaxation kernels
//!
//! E_n(t) = (1/2πi) ∫_γ w(s)/(s w(s) + λ_n) e^{st} ds,
//! G_n(t) = (1/2πi) ∫_γ 1/(s w(s) + λ_n) e^{st} ds,
//!
//! evaluated on the contour γ(ε, θ) (two rays at angle ±θ joined by an arc of
//! radius ε) and, independently, from the real-axis spectral density
//! Φ_n(r) = N(r)/((D(r)+λ_n)² + N(r)²) with N, D the sine and cosine moments of
//! r^α μ(α).

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, numeric, Result};
use crate::quadrature::GaussLegendre;
use crate::spectral::SpectralBasis;
use crate::weight::{zeta_inverse, WeightFunction};

pub use crate::special::mittag_leffler;

/// e^{R t cos θ} must not exceed this at the ray cutoff.
pub const TRUNCATION_TOL: f64 = 1e-16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelConfig {
    /// Ray angle θ ∈ (π/2, π).
    pub theta: f64,
    /// Gauss–Legendre points per ray panel.
    pub ray_order: usize,
    /// Gauss–Legendre points on the half-arc.
    pub arc_order: usize,
    /// Ratio of consecutive geometric ray panels.
    pub panel_ratio: f64,
    /// Largest t·(panel length) before a ray panel is subdivided.
    pub max_panel_phase: f64,
    /// Width in log r of the spectral-route panels.
    pub spectral_panel_width: f64,
    pub spectral_order: usize,
    /// Allowed imaginary residue of the full-contour quadrature.
    pub imag_tol: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            theta: 3.0 * PI / 4.0,
            ray_order: 16,
            arc_order: 32,
            panel_ratio: 2.0,
            max_panel_phase: 4.0,
            spectral_panel_width: 0.25,
            spectral_order: 16,
            imag_tol: 1e-10,
        }
    }
}

/// η = 1/(2‖μ‖∞).
pub fn eta(w: &WeightFunction) -> f64 {
    1.0 / (2.0 * w.sup_norm())
}

/// γ(ε, θ) truncated at R, with its quadrature layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourSpec {
    pub epsilon: f64,
    pub theta: f64,
    pub ray_cutoff: f64,
    /// Panel boundaries on the ray, from ε to R.
    pub ray_breaks: Vec<f64>,
    pub ray_order: usize,
    pub arc_order: usize,
}

impl ContourSpec {
    /// Contour for time t with the given arc radius and angle.
    pub fn new(epsilon: f64, theta: f64, t: f64, cfg: &KernelConfig) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(domain("ContourSpec", format!("t = {t} must be positive")));
        }
        if !(theta > PI / 2.0 && theta < PI) {
            return Err(domain("ContourSpec", format!("theta = {theta} not in (pi/2, pi)")));
        }
        if !(epsilon > 0.0) {
            return Err(domain("ContourSpec", format!("epsilon = {epsilon} must be positive")));
        }
        let ray_cutoff = 16.0 * std::f64::consts::LN_10 / (t * theta.cos().abs());
        let spec = Self {
            epsilon,
            theta,
            ray_cutoff,
            ray_breaks: ray_breaks(epsilon, ray_cutoff, t, cfg),
            ray_order: cfg.ray_order,
            arc_order: cfg.arc_order,
        };
        spec.certify(t)?;
        Ok(spec)
    }

    /// Checks ε ≤ R and the truncation certificate at time t.
    pub fn certify(&self, t: f64) -> Result<()> {
        if self.epsilon > self.ray_cutoff {
            return Err(numeric(
                "ContourSpec",
                format!("epsilon = {} exceeds ray cutoff {}", self.epsilon, self.ray_cutoff),
            ));
        }
        let tail = (self.ray_cutoff * t * self.theta.cos()).exp();
        if tail > TRUNCATION_TOL * (1.0 + 1e-9) {
            return Err(numeric(
                "ContourSpec",
                format!("truncation certificate e^(R t cos theta) = {tail:e} > {TRUNCATION_TOL:e}"),
            ));
        }
        Ok(())
    }

    pub fn ray_nodes(&self) -> usize {
        (self.ray_breaks.len() - 1) * self.ray_order
    }
}

fn ray_breaks(eps: f64, cutoff: f64, t: f64, cfg: &KernelConfig) -> Vec<f64> {
    let mut breaks = vec![eps];
    let mut a = eps;
    while a < cutoff {
        let b = (a * cfg.panel_ratio).min(cutoff);
        let pieces = ((b - a) * t / cfg.max_panel_phase).ceil().max(1.0) as usize;
        for k in 1..=pieces {
            breaks.push(a + (b - a) * k as f64 / pieces as f64);
        }
        a = b;
    }
    breaks
}

/// ε = min(½·min(1, ηλ₁, ζ⁻¹(ηλ₁)), 1/t), θ from the config.
pub fn choose_contour(t: f64, lambda1: f64, w: &WeightFunction, cfg: &KernelConfig) -> Result<ContourSpec> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(domain("choose_contour", format!("t = {t} must be positive")));
    }
    if !(lambda1 > 0.0) {
        return Err(domain("choose_contour", format!("lambda1 = {lambda1} must be positive")));
    }
    let el = eta(w) * lambda1;
    let eps = (0.5 * 1f64.min(el).min(zeta_inverse(el)?)).min(1.0 / t);
    ContourSpec::new(eps, cfg.theta, t, cfg)
}

struct ContourNode {
    /// (1/π)·ds·e^{st}
    coef: Complex64,
    w: Complex64,
    sw: Complex64,
}

/// Quadrature nodes of the upper half of γ at a fixed t, shared by all modes.
///
/// By conjugate symmetry the full contour integral is (1/π)·Im of the
/// upper-half integral (arc from angle 0 to θ, then the ray from ε to R).
pub struct ContourQuadrature {
    t: f64,
    nodes: Vec<ContourNode>,
}

impl ContourQuadrature {
    pub fn new(w: &WeightFunction, spec: &ContourSpec, t: f64) -> Result<Self> {
        spec.certify(t)?;
        let mut nodes = Vec::with_capacity(spec.arc_order + spec.ray_nodes());
        let eps = spec.epsilon;
        let arc = GaussLegendre::cached(spec.arc_order);
        for (phi, wq) in arc.mapped(0.0, spec.theta) {
            let log_s = Complex64::new(eps.ln(), phi);
            let s = log_s.exp();
            let ds = Complex64::i() * s * wq;
            let (wv, sw) = w.symbol_from_log(log_s);
            nodes.push(ContourNode { coef: ds * (s * t).exp() / PI, w: wv, sw });
        }
        let dir = Complex64::from_polar(1.0, spec.theta);
        let ray = GaussLegendre::cached(spec.ray_order);
        for p in spec.ray_breaks.windows(2) {
            for (rho, wq) in ray.mapped(p[0], p[1]) {
                let log_s = Complex64::new(rho.ln(), spec.theta);
                let s = rho * dir;
                let (wv, sw) = w.symbol_from_log(log_s);
                nodes.push(ContourNode { coef: dir * wq * (s * t).exp() / PI, w: wv, sw });
            }
        }
        Ok(Self { t, nodes })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn e(&self, lambda: f64) -> f64 {
        self.nodes
            .iter()
            .map(|n| (n.coef * n.w / (n.sw + lambda)).im)
            .sum()
    }

    pub fn g(&self, lambda: f64) -> f64 {
        self.nodes
            .iter()
            .map(|n| (n.coef / (n.sw + lambda)).im)
            .sum()
    }

    /// (E, G) for one λ in a single pass.
    pub fn e_and_g(&self, lambda: f64) -> (f64, f64) {
        self.nodes.iter().fold((0.0, 0.0), |(e, g), n| {
            let r = n.coef / (n.sw + lambda);
            (e + (r * n.w).im, g + r.im)
        })
    }
}

/// E for eigenvalue λ on the given contour.
pub fn eval_en_contour(lambda: f64, t: f64, w: &WeightFunction, spec: &ContourSpec) -> Result<f64> {
    Ok(ContourQuadrature::new(w, spec, t)?.e(lambda))
}

/// G for eigenvalue λ on the given contour.
pub fn eval_gn_contour(lambda: f64, t: f64, w: &WeightFunction, spec: &ContourSpec) -> Result<f64> {
    Ok(ContourQuadrature::new(w, spec, t)?.g(lambda))
}

/// (E, G) over the whole contour without the symmetry shortcut; both values
/// are complex and their imaginary parts measure the quadrature asymmetry.
pub fn eval_full_contour(
    lambda: f64,
    t: f64,
    w: &WeightFunction,
    spec: &ContourSpec,
) -> Result<(Complex64, Complex64)> {
    spec.certify(t)?;
    let mut e = Complex64::new(0.0, 0.0);
    let mut g = Complex64::new(0.0, 0.0);
    let mut add = |s: Complex64, ds: Complex64| -> Result<()> {
        let wv = w.eval_w(s)?;
        let r = ds * (s * t).exp() / (s * wv + lambda);
        e += r * wv;
        g += r;
        Ok(())
    };
    let eps = spec.epsilon;
    let arc = GaussLegendre::cached(2 * spec.arc_order);
    for (phi, wq) in arc.mapped(-spec.theta, spec.theta) {
        let s = Complex64::from_polar(eps, phi);
        add(s, Complex64::i() * s * wq)?;
    }
    let ray = GaussLegendre::cached(spec.ray_order);
    for sign in [1.0, -1.0] {
        let dir = Complex64::from_polar(1.0, sign * spec.theta);
        for p in spec.ray_breaks.windows(2) {
            for (rho, wq) in ray.mapped(p[0], p[1]) {
                // upper ray runs outward, lower ray inward
                add(rho * dir, sign * dir * wq)?;
            }
        }
    }
    let scale = Complex64::new(0.0, 2.0 * PI);
    Ok((e / scale, g / scale))
}

/// Φ(r) = N/((D+λ)² + N²), the spectral density for eigenvalue λ.
pub fn spectral_density(lambda: f64, r: f64, w: &WeightFunction) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(domain("spectral_density", format!("r = {r} must be positive")));
    }
    Ok(density_from_log(lambda, r.ln(), w))
}

fn density_from_log(lambda: f64, ln_r: f64, w: &WeightFunction) -> f64 {
    let (n, d) = w.cut_moments(ln_r);
    let dl = d + lambda;
    n / (dl * dl + n * n)
}

/// Nodes in u = ln r with weights r·du, shared by all modes at one t.
struct LogGrid {
    ln_r: Vec<f64>,
    weight: Vec<f64>,
    moments: Vec<(f64, f64)>,
}

impl LogGrid {
    fn new(w: &WeightFunction, u_lo: f64, u_hi: f64, cfg: &KernelConfig) -> Self {
        let rule = GaussLegendre::cached(cfg.spectral_order);
        let panels = ((u_hi - u_lo) / cfg.spectral_panel_width).ceil().max(1.0) as usize;
        let h = (u_hi - u_lo) / panels as f64;
        let mut g = Self { ln_r: Vec::new(), weight: Vec::new(), moments: Vec::new() };
        for p in 0..panels {
            let a = u_lo + p as f64 * h;
            for (u, wq) in rule.mapped(a, a + h) {
                g.ln_r.push(u);
                g.weight.push(wq);
                g.moments.push(w.cut_moments(u));
            }
        }
        g
    }

    fn integrate(&self, lambda: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.ln_r
            .iter()
            .zip(&self.weight)
            .zip(&self.moments)
            .map(|((&u, &wq), &(n, d))| {
                let dl = d + lambda;
                wq * n / (dl * dl + n * n) * f(u)
            })
            .sum()
    }
}

/// Real-axis route for one t, reusable across eigenvalues.
pub struct SpectralQuadrature {
    t: f64,
    u_lo: f64,
    u_hi: f64,
    grid: LogGrid,
}

impl SpectralQuadrature {
    pub fn new(w: &WeightFunction, t: f64, cfg: &KernelConfig) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(domain("SpectralQuadrature", format!("t = {t} must be positive")));
        }
        // Below r = 1e-20·min(1, 1/t) the density is O(r N(r)/λ²); above r t = 40
        // the factor e^{-rt} is below 4e-18.
        let u_lo = (1e-20 * (1.0f64).min(1.0 / t)).ln();
        let u_hi = (40.0 / t).ln();
        Ok(Self { t, u_lo, u_hi, grid: LogGrid::new(w, u_lo, u_hi, cfg) })
    }

    /// G = (1/π) ∫₀^∞ Φ(r) e^{−rt} dr.
    pub fn g(&self, lambda: f64, w: &WeightFunction) -> Result<f64> {
        let t = self.t;
        let val = self.grid.integrate(lambda, |u| {
            let r = u.exp();
            r * (-r * t).exp()
        }) / PI;
        let r0 = self.u_lo.exp();
        let lower_tail = r0 * density_from_log(lambda, self.u_lo, w) / PI;
        if !(val > 0.0) || lower_tail > 1e-14 * val {
            return Err(numeric(
                "eval_gn_spectral",
                format!("lower truncation {lower_tail:e} not negligible against {val:e}"),
            ));
        }
        Ok(val)
    }

    /// E = 1 − (λ/π) ∫₀^∞ Φ(r)(1 − e^{−rt})/r dr, from Ê = (1 − λ/(sw+λ))/s.
    pub fn e(&self, lambda: f64, w: &WeightFunction, cfg: &KernelConfig) -> Result<f64> {
        let t = self.t;
        let head = self.grid.integrate(lambda, |u| -(-u.exp() * t).exp_m1());
        let tail = march_right(lambda, w, self.u_hi, cfg)?;
        Ok(1.0 - lambda / PI * (head + tail))
    }
}

pub fn eval_gn_spectral(lambda: f64, t: f64, w: &WeightFunction, cfg: &KernelConfig) -> Result<f64> {
    SpectralQuadrature::new(w, t, cfg)?.g(lambda, w)
}

pub fn eval_en_spectral(lambda: f64, t: f64, w: &WeightFunction, cfg: &KernelConfig) -> Result<f64> {
    SpectralQuadrature::new(w, t, cfg)?.e(lambda, w, cfg)
}

/// ∫_{u0}^∞ Φ(e^u) du, marching panels until three in a row are negligible.
fn march_right(lambda: f64, w: &WeightFunction, u0: f64, cfg: &KernelConfig) -> Result<f64> {
    let rule = GaussLegendre::cached(cfg.spectral_order);
    let width = 2.0 * cfg.spectral_panel_width;
    let mut total = 0.0;
    let mut quiet = 0;
    for p in 0..20_000 {
        let a = u0 + p as f64 * width;
        let part = rule.integrate(a, a + width, |u| density_from_log(lambda, u, w));
        total += part;
        if part.abs() <= 1e-17 * total.abs() {
            quiet += 1;
            if quiet >= 3 {
                return Ok(total);
            }
        } else {
            quiet = 0;
        }
    }
    Err(numeric("spectral tail", format!("no convergence for lambda = {lambda}")))
}

/// ∫_{−∞}^{u0} Φ(e^u) du via u = u0 + 1 − 1/v; Φ decays only like 1/u² there.
fn march_left(lambda: f64, w: &WeightFunction, u0: f64, cfg: &KernelConfig) -> f64 {
    let rule = GaussLegendre::cached(2 * cfg.spectral_order);
    // Geometric panels in v towards 0.
    let mut total = 0.0;
    let mut b = 1.0;
    while b > 1e-6 {
        let a = 0.5 * b;
        total += rule.integrate(a, b, |v| {
            let u = u0 + 1.0 - 1.0 / v;
            density_from_log(lambda, u, w) / (v * v)
        });
        b = a;
    }
    total
}

/// Solves ∫₀¹ a^α μ(α) dα = λ/2 for a by bisection in ln a.
pub fn an_threshold(lambda: f64, w: &WeightFunction) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(domain("an_threshold", format!("lambda = {lambda} must be positive")));
    }
    let target = 0.5 * lambda;
    let h = |u: f64| w.power_moment(u);
    let (mut lo, mut hi) = (-1.0, 1.0);
    let mut guard = 0;
    while h(lo) > target {
        lo *= 2.0;
        guard += 1;
        if guard > 12 {
            return Err(numeric("an_threshold", format!("no lower bracket for lambda = {lambda}")));
        }
    }
    guard = 0;
    while h(hi) < target {
        hi *= 2.0;
        guard += 1;
        if guard > 12 {
            return Err(numeric("an_threshold", format!("no upper bracket for lambda = {lambda}")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * mid.abs().max(1.0) {
            break;
        }
    }
    let u = 0.5 * (lo + hi);
    let residual = (h(u) - target).abs();
    if residual > 1e-10 * lambda {
        return Err(numeric("an_threshold", format!("residual {residual:e} too large")));
    }
    Ok(u.exp())
}

/// ∫₀^∞ Φ(r)/r dr split at r = `split` into (below, above).
pub fn inverse_moment_split(
    lambda: f64,
    w: &WeightFunction,
    split: f64,
    cfg: &KernelConfig,
) -> Result<(f64, f64)> {
    if !(split > 0.0) {
        return Err(domain("inverse_moment_split", format!("split = {split} must be positive")));
    }
    let u = split.ln();
    let below = march_left(lambda, w, u, cfg);
    let above = march_right(lambda, w, u, cfg)?;
    if !(below.is_finite() && above.is_finite()) {
        return Err(numeric("inverse_moment_split", "divergent quadrature"));
    }
    Ok((below, above))
}

/// λ·∫₀^∞ Φ(r)/r dr, split at the threshold a(λ). Bounded in λ when μ vanishes
/// near α = 1.
pub fn scaled_inverse_moment(lambda: f64, w: &WeightFunction, cfg: &KernelConfig) -> Result<f64> {
    let a = an_threshold(lambda, w)?;
    let (below, above) = inverse_moment_split(lambda, w, a, cfg)?;
    Ok(lambda * (below + above))
}

/// dE/dt = −λ G.
pub fn den_dt(lambda: f64, t: f64, w: &WeightFunction, spec: &ContourSpec) -> Result<f64> {
    Ok(-lambda * eval_gn_contour(lambda, t, w, spec)?)
}

/// Central difference of E with step `rel_step`·t, each side on its own contour.
pub fn den_dt_fd(
    lambda: f64,
    t: f64,
    lambda1: f64,
    w: &WeightFunction,
    cfg: &KernelConfig,
    rel_step: f64,
) -> Result<f64> {
    let h = rel_step * t;
    let e = |tt: f64| -> Result<f64> {
        let spec = choose_contour(tt, lambda1, w, cfg)?;
        eval_en_contour(lambda, tt, w, &spec)
    };
    Ok((e(t + h)? - e(t - h)?) / (2.0 * h))
}

/// E_α(−λ t^α), the constant-order relaxation.
pub fn constant_order_relaxation(alpha: f64, lambda: f64, t: f64) -> Result<f64> {
    mittag_leffler(alpha, 1.0, -lambda * t.powf(alpha))
}

/// t^{α−1} E_{α,α}(−λ t^α), the constant-order response.
pub fn constant_order_response(alpha: f64, lambda: f64, t: f64) -> Result<f64> {
    Ok(t.powf(alpha - 1.0) * mittag_leffler(alpha, alpha, -lambda * t.powf(alpha))?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelMethod {
    Contour,
    Spectral,
}

/// E_n and G_n of one mode on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    pub mode: usize,
    pub times: Vec<f64>,
    pub e: Vec<f64>,
    pub g: Vec<f64>,
    pub method: KernelMethod,
}

/// Mode-indexed kernels for a weight and a basis (0-based mode index).
pub struct Kernels<'a> {
    pub weight: &'a WeightFunction,
    pub basis: &'a SpectralBasis,
    pub config: KernelConfig,
}

impl<'a> Kernels<'a> {
    pub fn new(weight: &'a WeightFunction, basis: &'a SpectralBasis, config: KernelConfig) -> Self {
        Self { weight, basis, config }
    }

    fn lambda(&self, n: usize) -> Result<f64> {
        self.basis
            .eigenvalues()
            .get(n)
            .copied()
            .ok_or_else(|| domain("Kernels", format!("mode {n} outside basis of {} modes", self.basis.modes())))
    }

    pub fn contour(&self, t: f64) -> Result<ContourSpec> {
        choose_contour(t, self.basis.eigenvalue(0), self.weight, &self.config)
    }

    /// Contour nodes at t for all modes.
    pub fn contour_quadrature(&self, t: f64) -> Result<ContourQuadrature> {
        ContourQuadrature::new(self.weight, &self.contour(t)?, t)
    }

    pub fn e_contour(&self, n: usize, t: f64) -> Result<f64> {
        Ok(self.contour_quadrature(t)?.e(self.lambda(n)?))
    }

    pub fn g_contour(&self, n: usize, t: f64) -> Result<f64> {
        Ok(self.contour_quadrature(t)?.g(self.lambda(n)?))
    }

    pub fn g_spectral(&self, n: usize, t: f64) -> Result<f64> {
        eval_gn_spectral(self.lambda(n)?, t, self.weight, &self.config)
    }

    pub fn e_spectral(&self, n: usize, t: f64) -> Result<f64> {
        eval_en_spectral(self.lambda(n)?, t, self.weight, &self.config)
    }

    pub fn phi(&self, n: usize, r: f64) -> Result<f64> {
        spectral_density(self.lambda(n)?, r, self.weight)
    }

    pub fn threshold(&self, n: usize) -> Result<f64> {
        an_threshold(self.lambda(n)?, self.weight)
    }

    pub fn scaled_inverse_moment(&self, n: usize) -> Result<f64> {
        scaled_inverse_moment(self.lambda(n)?, self.weight, &self.config)
    }

    /// E and G of all modes at every t, one table per mode; parallel over t.
    pub fn tables(&self, modes: &[usize], times: &[f64], method: KernelMethod) -> Result<Vec<KernelTable>> {
        let lambdas = modes.iter().map(|&n| self.lambda(n)).collect::<Result<Vec<_>>>()?;
        let columns: Vec<Vec<(f64, f64)>> = times
            .par_iter()
            .map(|&t| -> Result<Vec<(f64, f64)>> {
                match method {
                    KernelMethod::Contour => {
                        let q = self.contour_quadrature(t)?;
                        Ok(lambdas.iter().map(|&l| q.e_and_g(l)).collect())
                    }
                    KernelMethod::Spectral => {
                        let q = SpectralQuadrature::new(self.weight, t, &self.config)?;
                        lambdas
                            .iter()
                            .map(|&l| Ok((q.e(l, self.weight, &self.config)?, q.g(l, self.weight)?)))
                            .collect()
                    }
                }
            })
            .collect::<Result<_>>()?;
        Ok(modes
            .iter()
            .enumerate()
            .map(|(k, &n)| KernelTable {
                mode: n,
                times: times.to_vec(),
                e: columns.iter().map(|c| c[k].0).collect(),
                g: columns.iter().map(|c| c[k].1).collect(),
                method,
            })
            .collect())
    }
}
