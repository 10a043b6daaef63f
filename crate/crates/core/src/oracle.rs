//! Brute-force reference: L1 discretisation of each Caputo derivative,
//! Gauss–Legendre in α, implicit flux-form finite differences in space.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{domain, invariant, numeric, Error, Result};
use crate::problem::TimeProfile;
use crate::quadrature::GaussLegendre;
use crate::spectral::EllipticCoefficients;
use crate::weight::WeightFunction;

/// Grid function samples u(t_k, x_j).
#[derive(Debug, Clone, PartialEq)]
pub struct GridSolution {
    pub times: Vec<f64>,
    pub x: Vec<f64>,
    /// values[k][j] = u(t_k, x_j)
    pub values: Vec<Vec<f64>>,
}

impl GridSolution {
    pub fn new(times: Vec<f64>, x: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != times.len() {
            return Err(Error::Dimension { op: "GridSolution", expected: times.len(), found: values.len() });
        }
        if x.len() < 2 {
            return Err(domain("GridSolution", "spatial grid needs at least two points"));
        }
        for row in &values {
            if row.len() != x.len() {
                return Err(Error::Dimension { op: "GridSolution", expected: x.len(), found: row.len() });
            }
        }
        Ok(Self { times, x, values })
    }

    fn time_index(&self, t: f64) -> Option<usize> {
        let tol = 1e-9 * t.abs().max(1.0);
        self.times.iter().position(|&s| (s - t).abs() <= tol)
    }

    /// u(t_k, ·) linearly interpolated at `x`.
    fn interpolate(&self, k: usize, x: &[f64]) -> Vec<f64> {
        let row = &self.values[k];
        let g = &self.x;
        x.iter()
            .map(|&p| {
                let j = match g.iter().position(|&gx| gx >= p) {
                    Some(0) => return row[0],
                    Some(j) => j,
                    None => return row[g.len() - 1],
                };
                let s = (p - g[j - 1]) / (g[j] - g[j - 1]);
                row[j - 1] + s * (row[j] - row[j - 1])
            })
            .collect()
    }
}

/// Relative L² discrepancy ‖a − b‖/‖b‖ at each requested time, on the finer
/// of the two spatial grids.
pub fn compare(a: &GridSolution, b: &GridSolution, times: &[f64]) -> Result<Vec<f64>> {
    let (la, lb) = (*a.x.last().unwrap(), *b.x.last().unwrap());
    if (a.x[0] - b.x[0]).abs() > 1e-12 || (la - lb).abs() > 1e-9 * la.abs().max(1.0) {
        return Err(domain("compare", "spatial domains differ"));
    }
    let fine = if a.x.len() >= b.x.len() { &a.x } else { &b.x };
    let weights = trapezoid_weights(fine);
    times
        .iter()
        .map(|&t| {
            let (ka, kb) = match (a.time_index(t), b.time_index(t)) {
                (Some(ka), Some(kb)) => (ka, kb),
                _ => return Err(domain("compare", format!("time {t} not present in both solutions"))),
            };
            let ua = a.interpolate(ka, fine);
            let ub = b.interpolate(kb, fine);
            let diff: f64 = weights.iter().zip(ua.iter().zip(&ub)).map(|(w, (p, q))| w * (p - q) * (p - q)).sum();
            let norm: f64 = weights.iter().zip(&ub).map(|(w, q)| w * q * q).sum();
            Ok(if norm == 0.0 {
                if diff == 0.0 { 0.0 } else { f64::INFINITY }
            } else {
                (diff / norm).sqrt()
            })
        })
        .collect()
}

fn trapezoid_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut w = vec![0.0; n];
    for j in 0..n - 1 {
        let h = 0.5 * (x[j + 1] - x[j]);
        w[j] += h;
        w[j + 1] += h;
    }
    w
}

/// b_j = ((j+1)^{1−α} − j^{1−α})·Δt^{−α}/Γ(2−α), j = 0..k−1.
pub fn l1_weights(alpha: f64, k: usize, dt: f64) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain("l1_weights", format!("alpha = {alpha} not in the open interval (0,1)")));
    }
    if !(dt > 0.0) {
        return Err(domain("l1_weights", format!("dt = {dt} must be positive")));
    }
    let scale = dt.powf(-alpha) / gamma(2.0 - alpha);
    let e = 1.0 - alpha;
    Ok((0..k)
        .map(|j| ((j as f64 + 1.0).powf(e) - (j as f64).powf(e)) * scale)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub dt: f64,
    pub steps: usize,
    /// Gauss–Legendre nodes per non-zero piece of μ.
    pub alpha_nodes: usize,
}

impl OracleConfig {
    /// K = T/Δt steps; T must be an integer multiple of Δt.
    pub fn new(dt: f64, horizon: f64, alpha_nodes: usize) -> Result<Self> {
        if !(dt > 0.0 && horizon > 0.0) {
            return Err(invariant("oracle_grid", "dt and T must be positive"));
        }
        let steps = (horizon / dt).round() as usize;
        if steps == 0 || (steps as f64 * dt - horizon).abs() > 1e-9 * horizon {
            return Err(invariant("oracle_grid", format!("T = {horizon} is not a multiple of dt = {dt}")));
        }
        if alpha_nodes == 0 {
            return Err(invariant("oracle_grid", "need at least one alpha node"));
        }
        Ok(Self { dt, steps, alpha_nodes })
    }

    pub fn horizon(&self) -> f64 {
        self.dt * self.steps as f64
    }
}

/// Grid data for the oracle: F(t, x) = profile(t)·spatial(x).
#[derive(Debug, Clone)]
pub struct OracleProblem {
    pub weight: WeightFunction,
    pub coeffs: EllipticCoefficients,
    /// Grid points including both ends.
    pub points: usize,
    /// u₀ on the grid
    pub initial: Vec<f64>,
    pub source_spatial: Vec<f64>,
    pub source_profile: TimeProfile,
}

/// (α_q, W_q μ(α_q)) on each non-zero piece of μ.
fn alpha_rule(w: &WeightFunction, nodes: usize) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::cached(nodes);
    let b = w.breakpoints();
    let mut out = Vec::new();
    for p in 0..b.len() - 1 {
        if w.coefficients()[p].iter().all(|&c| c == 0.0) {
            continue;
        }
        for (alpha, wq) in rule.mapped(b[p], b[p + 1]) {
            let mu = w.eval_mu(alpha).unwrap_or(0.0);
            out.push((alpha, wq * mu));
        }
    }
    out
}

/// Marches u^k for k = 1..K; returns every step.
pub fn solve_oracle(problem: &OracleProblem, cfg: &OracleConfig) -> Result<GridSolution> {
    let m = problem.points;
    if m < 3 {
        return Err(invariant("oracle_grid", "need at least three grid points"));
    }
    if problem.initial.len() != m || problem.source_spatial.len() != m {
        return Err(Error::Dimension { op: "solve_oracle", expected: m, found: problem.initial.len() });
    }
    let k_steps = cfg.steps;
    let dt = cfg.dt;

    // Combined history weights B_j = Σ_q W_q μ(α_q) b_j(α_q).
    let mut big_b = vec![0.0; k_steps];
    for (alpha, mass) in alpha_rule(&problem.weight, cfg.alpha_nodes) {
        for (bj, v) in big_b.iter_mut().zip(l1_weights(alpha, k_steps, dt)?) {
            *bj += mass * v;
        }
    }
    if !(big_b[0] > 0.0) {
        return Err(numeric("solve_oracle", "leading memory weight is not positive"));
    }

    let l = problem.coeffs.length;
    let h = l / (m - 1) as f64;
    let x: Vec<f64> = (0..m).map(|j| j as f64 * h).collect();
    let n = m - 2;
    let a_half: Vec<f64> = (0..m - 1).map(|j| problem.coeffs.a.eval((j as f64 + 0.5) * h)).collect();
    let h2 = h * h;
    let diag: Vec<f64> = (0..n)
        .map(|i| big_b[0] + (a_half[i] + a_half[i + 1]) / h2 + problem.coeffs.q.eval(x[i + 1]))
        .collect();
    let off: Vec<f64> = (0..n.saturating_sub(1)).map(|i| -a_half[i + 1] / h2).collect();
    let thomas = Thomas::new(&diag, &off)?;

    let mut u: Vec<f64> = problem.initial[1..m - 1].to_vec();
    // increments[i] = u^{i+1} − u^i
    let mut increments: Vec<Vec<f64>> = Vec::with_capacity(k_steps);
    let mut times = Vec::with_capacity(k_steps);
    let mut values = Vec::with_capacity(k_steps);
    let mut rhs = vec![0.0; n];
    for k in 1..=k_steps {
        let t = k as f64 * dt;
        let p = problem.source_profile.value(t);
        for i in 0..n {
            rhs[i] = big_b[0] * u[i] + p * problem.source_spatial[i + 1];
        }
        // −Σ_{j=1}^{k−1} B_j (u^{k−j} − u^{k−j−1})
        for j in 1..k {
            let d = &increments[k - j - 1];
            let bj = big_b[j];
            for i in 0..n {
                rhs[i] -= bj * d[i];
            }
        }
        thomas.solve(&mut rhs);
        let inc: Vec<f64> = rhs.iter().zip(&u).map(|(a, b)| a - b).collect();
        u.copy_from_slice(&rhs);
        increments.push(inc);
        let mut row = Vec::with_capacity(m);
        row.push(0.0);
        row.extend_from_slice(&u);
        row.push(0.0);
        if row.iter().any(|v| !v.is_finite()) {
            return Err(numeric("solve_oracle", format!("non-finite value at step {k}")));
        }
        times.push(t);
        values.push(row);
    }
    GridSolution::new(times, x, values)
}

/// Tridiagonal LU without pivoting (diagonally dominant systems).
struct Thomas {
    c_prime: Vec<f64>,
    denom: Vec<f64>,
    off: Vec<f64>,
}

impl Thomas {
    fn new(diag: &[f64], off: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut c_prime = vec![0.0; n];
        let mut denom = vec![0.0; n];
        for i in 0..n {
            let prev = if i > 0 { off[i - 1] * c_prime[i - 1] } else { 0.0 };
            let d = diag[i] - prev;
            if d.abs() < 1e-300 {
                return Err(numeric("solve_oracle", "singular step matrix"));
            }
            denom[i] = d;
            if i + 1 < n {
                c_prime[i] = off[i] / d;
            }
        }
        Ok(Self { c_prime, denom, off: off.to_vec() })
    }

    fn solve(&self, r: &mut [f64]) {
        let n = r.len();
        r[0] /= self.denom[0];
        for i in 1..n {
            r[i] = (r[i] - self.off[i - 1] * r[i - 1]) / self.denom[i];
        }
        for i in (0..n - 1).rev() {
            r[i] -= self.c_prime[i] * r[i + 1];
        }
    }
}
