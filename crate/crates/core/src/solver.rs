//! Spectral solution u(t) = Σ_n [E_n(t) c_n(0) + ∫₀ᵗ G_n(t−τ) f_n(τ) dτ] φ_n.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, invariant, numeric, Error, Result};
use crate::kernel::{ContourQuadrature, KernelConfig, Kernels};
use crate::oracle::GridSolution;
use crate::problem::TimeProfile;
use crate::quadrature::GaussLegendre;
use crate::spectral::{fractional_norm, SpectralBasis};
use crate::weight::WeightFunction;

/// Modal source f_n(t).
pub trait Source: Send + Sync {
    fn modes(&self) -> usize;
    /// Writes f_n(t) for every mode into `out`.
    fn eval(&self, t: f64, out: &mut [f64]);
    /// Times where f jumps; Duhamel panels are split there.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
    /// Upper bound of ‖F(t)‖ on [0, T].
    fn bound(&self) -> f64;
    fn is_zero(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone)]
pub struct ZeroSource {
    pub modes: usize,
}

impl Source for ZeroSource {
    fn modes(&self) -> usize {
        self.modes
    }
    fn eval(&self, _t: f64, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
    }
    fn bound(&self) -> f64 {
        0.0
    }
    fn is_zero(&self) -> bool {
        true
    }
}

/// f_n(t) = c_n·profile(t).
#[derive(Debug, Clone)]
pub struct ModalSource {
    pub coeffs: Vec<f64>,
    pub profile: TimeProfile,
}

impl Source for ModalSource {
    fn modes(&self) -> usize {
        self.coeffs.len()
    }
    fn eval(&self, t: f64, out: &mut [f64]) {
        let p = self.profile.value(t);
        for (o, c) in out.iter_mut().zip(&self.coeffs) {
            *o = c * p;
        }
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.profile.breakpoints()
    }
    fn bound(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt() * self.profile.sup()
    }
    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }
}

/// Sum of smooth modal terms Σ_k c_k·profile_k(t), used for random families.
#[derive(Debug, Clone)]
pub struct SumSource {
    pub terms: Vec<ModalSource>,
}

impl Source for SumSource {
    fn modes(&self) -> usize {
        self.terms.first().map_or(0, |t| t.modes())
    }
    fn eval(&self, t: f64, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for term in &self.terms {
            let p = term.profile.value(t);
            for (o, c) in out.iter_mut().zip(&term.coeffs) {
                *o += c * p;
            }
        }
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.terms.iter().flat_map(|t| t.breakpoints()).collect()
    }
    fn bound(&self) -> f64 {
        self.terms.iter().map(|t| t.bound()).sum()
    }
}

/// Graded Duhamel quadrature: σ = t·v^grading, `panels` × `order` nodes in v.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DuhamelConfig {
    pub panels: usize,
    pub order: usize,
    pub grading: f64,
}

impl Default for DuhamelConfig {
    fn default() -> Self {
        Self { panels: 16, order: 16, grading: 2.0 }
    }
}

/// Everything the spectral solver needs.
#[derive(Clone)]
pub struct ProblemSpec {
    pub weight: WeightFunction,
    pub basis: Arc<SpectralBasis>,
    /// c_n(0)
    pub initial: Vec<f64>,
    pub source: Arc<dyn Source>,
    pub horizon: f64,
    /// γ with u₀ ∈ D(A^γ), when known.
    pub regularity: Option<f64>,
    pub kernel: KernelConfig,
    pub duhamel: DuhamelConfig,
}

impl ProblemSpec {
    pub fn new(weight: WeightFunction, basis: Arc<SpectralBasis>, initial: Vec<f64>, horizon: f64) -> Result<Self> {
        let modes = basis.modes();
        let p = Self {
            weight,
            basis,
            initial,
            source: Arc::new(ZeroSource { modes }),
            horizon,
            regularity: None,
            kernel: KernelConfig::default(),
            duhamel: DuhamelConfig::default(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_source(mut self, source: Arc<dyn Source>) -> Result<Self> {
        self.source = source;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.basis.modes();
        if self.initial.len() != n {
            return Err(Error::Dimension { op: "ProblemSpec", expected: n, found: self.initial.len() });
        }
        if self.source.modes() != n {
            return Err(Error::Dimension { op: "ProblemSpec source", expected: n, found: self.source.modes() });
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(invariant("horizon", format!("T = {} must be positive", self.horizon)));
        }
        if !self.source.bound().is_finite() {
            return Err(invariant("source_bounded", "source bound is not finite"));
        }
        if let Some(g) = self.regularity {
            if !(g > 0.0 && g <= 1.0) {
                return Err(invariant("regularity", format!("gamma = {g} not in (0,1]")));
            }
        }
        Ok(())
    }

    pub fn kernels(&self) -> Kernels<'_> {
        Kernels::new(&self.weight, &self.basis, self.kernel.clone())
    }

    fn check_time(&self, op: &'static str, t: f64) -> Result<()> {
        if !(t > 0.0 && t <= self.horizon * (1.0 + 1e-12)) {
            return Err(domain(op, format!("t = {t} outside (0, T = {}]", self.horizon)));
        }
        Ok(())
    }
}

/// c_n(t) = E_n(t)·c_n(0).
pub fn propagate_homogeneous(problem: &ProblemSpec, t: f64) -> Result<Vec<f64>> {
    problem.check_time("propagate_homogeneous", t)?;
    let q = problem.kernels().contour_quadrature(t)?;
    Ok(apply_relaxation(&q, problem.basis.eigenvalues(), &problem.initial))
}

fn apply_relaxation(q: &ContourQuadrature, eigenvalues: &[f64], initial: &[f64]) -> Vec<f64> {
    initial
        .iter()
        .zip(eigenvalues)
        .map(|(&c, &l)| if c == 0.0 { 0.0 } else { q.e(l) * c })
        .collect()
}

/// Nodes (σ, weight) of the graded Duhamel rule on (0, t), split where the
/// source jumps.
fn duhamel_nodes(t: f64, cfg: &DuhamelConfig, jumps: &[f64]) -> Vec<(f64, f64)> {
    let g = cfg.grading;
    let mut breaks: Vec<f64> = (0..=cfg.panels).map(|k| k as f64 / cfg.panels as f64).collect();
    for &tau in jumps {
        if tau > 0.0 && tau < t {
            breaks.push(((t - tau) / t).powf(1.0 / g));
        }
    }
    breaks.sort_by(|a, b| a.total_cmp(b));
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let rule = GaussLegendre::cached(cfg.order);
    let mut nodes = Vec::with_capacity(breaks.len() * cfg.order);
    for p in breaks.windows(2) {
        for (v, wq) in rule.mapped(p[0], p[1]) {
            nodes.push((t * v.powf(g), wq * g * t * v.powf(g - 1.0)));
        }
    }
    nodes
}

/// c_n(t) = ∫₀ᵗ G_n(σ) f_n(t − σ) dσ.
pub fn duhamel(problem: &ProblemSpec, t: f64) -> Result<Vec<f64>> {
    problem.check_time("duhamel", t)?;
    let n = problem.basis.modes();
    if problem.source.is_zero() {
        return Ok(vec![0.0; n]);
    }
    let nodes = duhamel_nodes(t, &problem.duhamel, &problem.source.breakpoints());
    let kernels = problem.kernels();
    let lambdas = problem.basis.eigenvalues();
    let parts: Vec<Vec<f64>> = nodes
        .par_iter()
        .map(|&(sigma, weight)| -> Result<Vec<f64>> {
            let q = kernels.contour_quadrature(sigma)?;
            let mut f = vec![0.0; n];
            problem.source.eval(t - sigma, &mut f);
            Ok(f
                .iter()
                .zip(lambdas)
                .map(|(&fv, &l)| if fv == 0.0 { 0.0 } else { weight * q.g(l) * fv })
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut out = vec![0.0; n];
    for p in parts {
        for (o, v) in out.iter_mut().zip(p) {
            *o += v;
        }
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(numeric("duhamel", format!("non-finite coefficient at t = {t}")));
    }
    Ok(out)
}

/// G_n at the Duhamel nodes of a fixed time grid, reusable across smooth
/// sources that share the basis and weight.
pub struct DuhamelTable {
    times: Vec<f64>,
    /// per time: (σ, weight, G_n(σ) for all n)
    nodes: Vec<Vec<(f64, f64, Vec<f64>)>>,
}

impl DuhamelTable {
    pub fn new(problem: &ProblemSpec, times: &[f64]) -> Result<Self> {
        let kernels = problem.kernels();
        let lambdas = problem.basis.eigenvalues();
        let nodes = times
            .iter()
            .map(|&t| {
                problem.check_time("DuhamelTable", t)?;
                duhamel_nodes(t, &problem.duhamel, &[])
                    .par_iter()
                    .map(|&(sigma, w)| {
                        let q = kernels.contour_quadrature(sigma)?;
                        Ok((sigma, w, lambdas.iter().map(|&l| q.g(l)).collect()))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        Ok(Self { times: times.to_vec(), nodes })
    }

    /// Duhamel coefficients of a jump-free source at every table time.
    pub fn apply(&self, source: &dyn Source) -> Result<Vec<Vec<f64>>> {
        if !source.breakpoints().is_empty() {
            return Err(domain("DuhamelTable", "source has jumps; use duhamel() instead"));
        }
        let n = source.modes();
        let mut f = vec![0.0; n];
        Ok(self
            .times
            .iter()
            .zip(&self.nodes)
            .map(|(&t, nodes)| {
                let mut out = vec![0.0; n];
                for (sigma, w, g) in nodes {
                    source.eval(t - sigma, &mut f);
                    for k in 0..n.min(g.len()) {
                        out[k] += w * g[k] * f[k];
                    }
                }
                out
            })
            .collect())
    }
}

/// Mode coefficients on a time grid.
#[derive(Debug, Clone)]
pub struct SolutionField {
    pub times: Vec<f64>,
    /// coeffs[k][n] = c_n(t_k)
    pub coeffs: Vec<Vec<f64>>,
    pub basis: Arc<SpectralBasis>,
    /// |E_N(t_k)|: modes beyond N are damped at least this much.
    pub tail_factor: Vec<f64>,
}

impl SolutionField {
    pub fn from_coefficients(times: Vec<f64>, coeffs: Vec<Vec<f64>>, basis: Arc<SpectralBasis>) -> Result<Self> {
        if times.len() != coeffs.len() {
            return Err(Error::Dimension { op: "SolutionField", expected: times.len(), found: coeffs.len() });
        }
        for c in &coeffs {
            if c.len() != basis.modes() {
                return Err(Error::Dimension { op: "SolutionField", expected: basis.modes(), found: c.len() });
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(invariant("finite_entries", "solution coefficient is not finite"));
            }
        }
        let tail_factor = vec![f64::NAN; times.len()];
        Ok(Self { times, coeffs, basis, tail_factor })
    }

    /// ‖u(t_k)‖_{D(A^κ)} for every k.
    pub fn norms(&self, kappa: f64) -> Result<Vec<f64>> {
        self.coeffs
            .iter()
            .map(|c| fractional_norm(self.basis.eigenvalues(), c, kappa))
            .collect()
    }

    /// u(t_k) on the basis grid.
    pub fn grid_values(&self, k: usize) -> Result<Vec<f64>> {
        self.basis.synthesize(&self.coeffs[k])
    }

    pub fn to_grid(&self) -> Result<GridSolution> {
        let values = (0..self.times.len())
            .map(|k| self.grid_values(k))
            .collect::<Result<_>>()?;
        GridSolution::new(self.times.clone(), self.basis.grid().to_vec(), values)
    }

    /// (∫₀ᵀ ‖u(t)‖^p_{D(A^κ)} dt)^{1/p}: trapezoid on the grid plus a left
    /// rectangle on [0, t₀].
    pub fn sobolev_norm_path(&self, kappa: f64, p: f64) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(domain("sobolev_norm_path", format!("p = {p} must be >= 1")));
        }
        let norms: Vec<f64> = self.norms(kappa)?.iter().map(|v| v.powf(p)).collect();
        let mut total = self.times[0] * norms[0];
        for k in 1..self.times.len() {
            total += 0.5 * (self.times[k] - self.times[k - 1]) * (norms[k] + norms[k - 1]);
        }
        Ok(total.powf(1.0 / p))
    }

    /// Least-squares slope of log‖u‖_{D(A^κ)} against log t over [t_a, t_b].
    pub fn estimate_decay_exponent(&self, kappa: f64, window: (f64, f64)) -> Result<f64> {
        let norms = self.norms(kappa)?;
        let pts: Vec<(f64, f64)> = self
            .times
            .iter()
            .zip(&norms)
            .filter(|(&t, _)| t >= window.0 * (1.0 - 1e-12) && t <= window.1 * (1.0 + 1e-12))
            .map(|(&t, &v)| (t, v))
            .collect();
        if pts.len() < 2 {
            return Err(domain("estimate_decay_exponent", "fewer than two grid times inside the window"));
        }
        if pts.iter().any(|&(_, v)| !(v > 0.0)) {
            return Err(numeric("estimate_decay_exponent", "non-positive norm inside the window"));
        }
        let xy: Vec<(f64, f64)> = pts.iter().map(|&(t, v)| (t.ln(), v.ln())).collect();
        Ok(least_squares_slope(&xy))
    }
}

pub(crate) fn least_squares_slope(xy: &[(f64, f64)]) -> f64 {
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Whether p lies below the integrability threshold 1/(1 − α₀(1 − κ)).
pub fn lp_exponent_admissible(alpha0: f64, kappa: f64, p: f64) -> bool {
    p < 1.0 / (1.0 - alpha0 * (1.0 - kappa))
}

/// Homogeneous part plus Duhamel term at every grid time.
pub fn solve(problem: &ProblemSpec, times: &[f64]) -> Result<SolutionField> {
    for &t in times {
        problem.check_time("solve", t)?;
    }
    let kernels = problem.kernels();
    let lambdas = problem.basis.eigenvalues();
    let last = *lambdas.last().unwrap();
    let rows: Vec<(Vec<f64>, f64)> = times
        .par_iter()
        .map(|&t| -> Result<(Vec<f64>, f64)> {
            let q = kernels.contour_quadrature(t)?;
            let mut c = apply_relaxation(&q, lambdas, &problem.initial);
            if !problem.source.is_zero() {
                for (a, b) in c.iter_mut().zip(duhamel(problem, t)?) {
                    *a += b;
                }
            }
            Ok((c, q.e(last).abs()))
        })
        .collect::<Result<_>>()?;
    let (coeffs, tail): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    let mut field = SolutionField::from_coefficients(times.to_vec(), coeffs, problem.basis.clone())?;
    field.tail_factor = tail;
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::build_exact_dirichlet;

    fn unit_problem(initial: Vec<f64>) -> ProblemSpec {
        let basis = Arc::new(build_exact_dirichlet(std::f64::consts::PI, 4).unwrap());
        ProblemSpec::new(WeightFunction::constant(1.0, 0.5, 0.25).unwrap(), basis, initial, 1.0).unwrap()
    }

    #[test]
    fn homogeneous_is_diagonal() {
        let p = unit_problem(vec![1.0, 0.0, 0.0, 0.0]);
        let c = propagate_homogeneous(&p, 0.5).unwrap();
        let e = p.kernels().e_contour(0, 0.5).unwrap();
        assert!((c[0] - e).abs() < 1e-15);
        assert!(c[1..].iter().all(|&v| v == 0.0));
        assert!(propagate_homogeneous(&p, 0.0).is_err());
        assert!(propagate_homogeneous(&p, 1.5).is_err());
        let z = unit_problem(vec![0.0; 4]);
        assert!(propagate_homogeneous(&z, 0.5).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_source_gives_zero_duhamel() {
        let p = unit_problem(vec![1.0, 0.0, 0.0, 0.0]);
        assert!(duhamel(&p, 0.7).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn graded_nodes_integrate_weak_singularity() {
        // ∫₀¹ σ^{-1/2} dσ = 2
        let nodes = duhamel_nodes(1.0, &DuhamelConfig::default(), &[]);
        let s: f64 = nodes.iter().map(|(s, w)| w / s.sqrt()).sum();
        assert!((s - 2.0).abs() < 1e-12);
        let split = duhamel_nodes(1.0, &DuhamelConfig::default(), &[0.3]);
        assert!(split.len() > nodes.len());
    }

    #[test]
    fn synthetic_power_law_slope() {
        let basis = Arc::new(build_exact_dirichlet(std::f64::consts::PI, 2).unwrap());
        let times: Vec<f64> = (0..10).map(|k| 10f64.powf(-3.0 + 0.3 * k as f64)).collect();
        let coeffs = times.iter().map(|t| vec![t.powf(-0.3), 0.0]).collect();
        let f = SolutionField::from_coefficients(times, coeffs, basis).unwrap();
        let s = f.estimate_decay_exponent(0.0, (1e-3, 1.0)).unwrap();
        assert!((s + 0.3).abs() < 1e-6);
    }

    #[test]
    fn norm_path_examples() {
        let basis = Arc::new(build_exact_dirichlet(std::f64::consts::PI, 2).unwrap());
        let times: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
        let ones = times.iter().map(|_| vec![1.0, 0.0]).collect();
        let f = SolutionField::from_coefficients(times.clone(), ones, basis.clone()).unwrap();
        assert!((f.sobolev_norm_path(0.0, 1.0).unwrap() - 1.0).abs() < 1e-14);
        let zeros = times.iter().map(|_| vec![0.0, 0.0]).collect();
        let z = SolutionField::from_coefficients(times, zeros, basis).unwrap();
        assert_eq!(z.sobolev_norm_path(0.5, 2.0).unwrap(), 0.0);
    }
}
