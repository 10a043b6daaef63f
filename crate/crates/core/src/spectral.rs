//! Eigenpairs of A = −(a u')' + q u on (0, L) with Dirichlet ends.
//!
//! Grid functions live on M uniform points including both endpoints; the
//! inner product is the trapezoid rule, which with zero boundary values is
//! h·Σ over interior points.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{domain, invariant, numeric, Error, Result};

/// Default grid for closed-form bases.
pub const DEFAULT_EXACT_POINTS: usize = 513;

/// Polynomial in x with ascending coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial(pub Vec<f64>);

impl Polynomial {
    pub fn constant(c: f64) -> Self {
        Self(vec![c])
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        if self.0.len() <= 1 {
            return Self(vec![0.0]);
        }
        Self(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.0.len().max(other.0.len());
        Self(
            (0..n)
                .map(|k| self.0.get(k).copied().unwrap_or(0.0) + other.0.get(k).copied().unwrap_or(0.0))
                .collect(),
        )
    }

    /// max over [0, L] of |p| + |p'|, sampled.
    pub fn c1_norm(&self, length: f64) -> f64 {
        let d = self.derivative();
        let (mut m0, mut m1) = (0.0f64, 0.0f64);
        for k in 0..=2048 {
            let x = length * k as f64 / 2048.0;
            m0 = m0.max(self.eval(x).abs());
            m1 = m1.max(d.eval(x).abs());
        }
        m0 + m1
    }
}

/// Diffusion a(x) ≥ c_a and potential q(x) ≥ 0 on [0, L].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticCoefficients {
    pub a: Polynomial,
    pub q: Polynomial,
    pub c_a: f64,
    pub length: f64,
}

impl EllipticCoefficients {
    pub fn new(a: Polynomial, q: Polynomial, c_a: f64, length: f64) -> Result<Self> {
        let c = Self { a, q, c_a, length };
        c.validate(1025)?;
        Ok(c)
    }

    /// a ≡ 1, q ≡ 0 on (0, L).
    pub fn laplacian(length: f64) -> Result<Self> {
        Self::new(Polynomial::constant(1.0), Polynomial::constant(0.0), 1.0, length)
    }

    fn validate(&self, points: usize) -> Result<()> {
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(invariant("length", format!("L = {} must be positive", self.length)));
        }
        if !(self.c_a > 0.0) {
            return Err(invariant("ellipticity", format!("c_a = {} must be positive", self.c_a)));
        }
        for k in 0..points {
            let x = self.length * k as f64 / (points - 1) as f64;
            let a = self.a.eval(x);
            if !(a >= self.c_a) {
                return Err(invariant("ellipticity", format!("a({x}) = {a} < c_a = {}", self.c_a)));
            }
            let q = self.q.eval(x);
            if !(q >= 0.0) {
                return Err(invariant("potential_nonnegative", format!("q({x}) = {q} < 0")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    ExactDirichlet,
    FiniteDifference,
}

/// Lowest N eigenpairs, eigenvectors sampled on the grid and orthonormal in
/// the trapezoid inner product.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    kind: BasisKind,
    length: f64,
    floor: f64,
    eigenvalues: Vec<f64>,
    grid: Vec<f64>,
    vectors: Vec<Vec<f64>>,
}

fn uniform_grid(length: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|j| length * j as f64 / (points - 1) as f64)
        .collect()
}

/// λ_n = (nπ/L)², φ_n = √(2/L) sin(nπx/L) on the default grid.
pub fn build_exact_dirichlet(length: f64, modes: usize) -> Result<SpectralBasis> {
    build_exact_dirichlet_on(length, modes, DEFAULT_EXACT_POINTS.max(2 * modes + 2))
}

/// Closed-form basis sampled on `points` grid points. The samples are exactly
/// orthonormal in the trapezoid product while N < points − 1.
pub fn build_exact_dirichlet_on(length: f64, modes: usize, points: usize) -> Result<SpectralBasis> {
    if !(length > 0.0 && length.is_finite()) {
        return Err(domain("build_exact_dirichlet", format!("L = {length} must be positive")));
    }
    if modes == 0 {
        return Err(domain("build_exact_dirichlet", "need at least one mode"));
    }
    if points < modes + 2 {
        return Err(domain(
            "build_exact_dirichlet",
            format!("grid of {points} points cannot carry {modes} modes"),
        ));
    }
    let grid = uniform_grid(length, points);
    let scale = (2.0 / length).sqrt();
    let eigenvalues = (1..=modes).map(|n| (n as f64 * PI / length).powi(2)).collect();
    let vectors = (1..=modes)
        .map(|n| {
            let k = n as f64 * PI / length;
            let mut v: Vec<f64> = grid.iter().map(|&x| scale * (k * x).sin()).collect();
            v[0] = 0.0;
            v[points - 1] = 0.0;
            v
        })
        .collect();
    Ok(SpectralBasis {
        kind: BasisKind::ExactDirichlet,
        length,
        floor: (PI / length).powi(2),
        eigenvalues,
        grid,
        vectors,
    })
}

/// Flux-form finite differences on `points` grid points, lowest `modes` pairs.
pub fn build_fd(coeffs: &EllipticCoefficients, points: usize, modes: usize) -> Result<SpectralBasis> {
    if modes == 0 || points < modes + 2 {
        return Err(domain(
            "build_fd",
            format!("need M >= N + 2 and N >= 1, got M = {points}, N = {modes}"),
        ));
    }
    coeffs.validate(points)?;
    let l = coeffs.length;
    let h = l / (points - 1) as f64;
    let grid = uniform_grid(l, points);
    let n_int = points - 2;
    let a_half: Vec<f64> = (0..points - 1)
        .map(|j| coeffs.a.eval((j as f64 + 0.5) * h))
        .collect();
    for (j, &a) in a_half.iter().enumerate() {
        if !(a >= coeffs.c_a) {
            return Err(invariant(
                "ellipticity",
                format!("a({}) = {a} < c_a = {}", (j as f64 + 0.5) * h, coeffs.c_a),
            ));
        }
    }
    let h2 = h * h;
    let diag: Vec<f64> = (0..n_int)
        .map(|i| (a_half[i] + a_half[i + 1]) / h2 + coeffs.q.eval(grid[i + 1]))
        .collect();
    let off: Vec<f64> = (0..n_int - 1).map(|i| -a_half[i + 1] / h2).collect();
    let tri = Tridiagonal { diag, off };
    let (eigenvalues, interior) = tri.lowest_eigenpairs(modes)?;
    let vectors = interior
        .into_iter()
        .map(|v| {
            let mut full = Vec::with_capacity(points);
            full.push(0.0);
            let norm = (h * v.iter().map(|x| x * x).sum::<f64>()).sqrt();
            // Fix the sign so the first non-negligible entry is positive.
            let sign = v
                .iter()
                .find(|x| x.abs() > 1e-8)
                .map_or(1.0, |x| x.signum());
            full.extend(v.iter().map(|x| sign * x / norm));
            full.push(0.0);
            full
        })
        .collect();
    // a ≥ c_a termwise gives T ≥ c_a·T_lap, so the discrete floor is c_a times
    // the lowest eigenvalue of the discrete Dirichlet Laplacian.
    let floor = coeffs.c_a * 4.0 / h2 * (PI * h / (2.0 * l)).sin().powi(2);
    let basis = SpectralBasis {
        kind: BasisKind::FiniteDifference,
        length: l,
        floor,
        eigenvalues,
        grid,
        vectors,
    };
    if basis.eigenvalues[0] < floor * (1.0 - 1e-10) {
        return Err(invariant(
            "spectral_floor",
            format!("lambda_1 = {} below the ellipticity floor {floor}", basis.eigenvalues[0]),
        ));
    }
    Ok(basis)
}

impl SpectralBasis {
    pub fn kind(&self) -> BasisKind {
        self.kind
    }
    pub fn length(&self) -> f64 {
        self.length
    }
    /// Guaranteed lower bound for λ₁.
    pub fn floor(&self) -> f64 {
        self.floor
    }
    pub fn modes(&self) -> usize {
        self.eigenvalues.len()
    }
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }
    pub fn eigenvalue(&self, n: usize) -> f64 {
        self.eigenvalues[n]
    }
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }
    pub fn spacing(&self) -> f64 {
        self.grid[1] - self.grid[0]
    }
    /// φ_n sampled on the grid (0-based n).
    pub fn vector(&self, n: usize) -> &[f64] {
        &self.vectors[n]
    }

    /// First `modes` pairs only.
    pub fn truncated(&self, modes: usize) -> Result<Self> {
        if modes == 0 || modes > self.modes() {
            return Err(domain("truncated", format!("cannot keep {modes} of {} modes", self.modes())));
        }
        let mut b = self.clone();
        b.eigenvalues.truncate(modes);
        b.vectors.truncate(modes);
        Ok(b)
    }

    /// Trapezoid inner product on the grid.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> Result<f64> {
        self.check_grid("inner", f.len())?;
        self.check_grid("inner", g.len())?;
        let m = f.len();
        let h = self.spacing();
        let interior: f64 = (1..m - 1).map(|j| f[j] * g[j]).sum();
        Ok(h * (interior + 0.5 * (f[0] * g[0] + f[m - 1] * g[m - 1])))
    }

    fn check_grid(&self, op: &'static str, len: usize) -> Result<()> {
        if len != self.grid.len() {
            return Err(Error::Dimension { op, expected: self.grid.len(), found: len });
        }
        Ok(())
    }

    pub fn project(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check_grid("project", f.len())?;
        self.vectors.iter().map(|v| self.inner(f, v)).collect()
    }

    pub fn synthesize(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        if coeffs.len() != self.modes() {
            return Err(Error::Dimension { op: "synthesize", expected: self.modes(), found: coeffs.len() });
        }
        let mut out = vec![0.0; self.grid.len()];
        for (c, v) in coeffs.iter().zip(&self.vectors) {
            if *c == 0.0 {
                continue;
            }
            for (o, x) in out.iter_mut().zip(v) {
                *o += c * x;
            }
        }
        Ok(out)
    }

    /// (Σ λ_n^{2κ} c_n²)^{1/2}, the D(A^κ) norm.
    pub fn fractional_norm(&self, coeffs: &[f64], kappa: f64) -> Result<f64> {
        fractional_norm(&self.eigenvalues, coeffs, kappa)
    }

    /// Largest |⟨φ_i, φ_j⟩ − δ_ij|.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.modes() {
            for j in 0..=i {
                let ip = self.inner(&self.vectors[i], &self.vectors[j]).unwrap_or(f64::NAN);
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((ip - target).abs());
            }
        }
        worst
    }

    /// CSV with columns n, lambda_n (1-based n).
    pub fn write_eigenvalues_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "n,lambda_n")?;
        for (n, l) in self.eigenvalues.iter().enumerate() {
            writeln!(out, "{},{:.17e}", n + 1, l)?;
        }
        Ok(())
    }

    /// Whitespace-separated text matrix: one row per grid point, first column x,
    /// then φ_1..φ_N.
    pub fn write_eigenvectors<W: Write>(&self, mut out: W) -> Result<()> {
        for (j, x) in self.grid.iter().enumerate() {
            write!(out, "{x:.17e}")?;
            for v in &self.vectors {
                write!(out, " {:.17e}", v[j])?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// (Σ λ_n^{2κ} c_n²)^{1/2} over paired eigenvalues and coefficients.
pub fn fractional_norm(eigenvalues: &[f64], coeffs: &[f64], kappa: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&kappa) {
        return Err(domain("fractional_norm", format!("kappa = {kappa} not in [0,1]")));
    }
    if coeffs.len() > eigenvalues.len() {
        return Err(Error::Dimension {
            op: "fractional_norm",
            expected: eigenvalues.len(),
            found: coeffs.len(),
        });
    }
    Ok(coeffs
        .iter()
        .zip(eigenvalues)
        .map(|(c, l)| l.powf(2.0 * kappa) * c * c)
        .sum::<f64>()
        .sqrt())
}

/// Symmetric tridiagonal matrix.
struct Tridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl Tridiagonal {
    fn len(&self) -> usize {
        self.diag.len()
    }

    /// Number of eigenvalues strictly below x (Sturm count on LDLᵀ).
    fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..self.len() {
            let b2 = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] };
            d = self.diag[i] - x - b2 / d;
            if d == 0.0 {
                d = -f64::EPSILON * (self.diag[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// k-th smallest eigenvalue (0-based) by bisection.
    fn eigenvalue(&self, k: usize, lo: f64, hi: f64) -> f64 {
        let (mut lo, mut hi) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn lowest_eigenpairs(&self, k: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let (lo, hi) = self.gershgorin();
        let pad = 1e-12 * (hi - lo).abs().max(1.0);
        let (lo, hi) = (lo - pad, hi + pad);
        let mut values = Vec::with_capacity(k);
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
        let scale = lo.abs().max(hi.abs());
        for j in 0..k {
            let lambda = self.eigenvalue(j, lo, hi);
            let mut v = self.inverse_iteration(lambda, scale, j)?;
            // Re-orthogonalise against earlier vectors (clustered eigenvalues).
            for _ in 0..2 {
                for u in &vectors {
                    let p: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                    for (x, y) in v.iter_mut().zip(u) {
                        *x -= p * y;
                    }
                }
                normalise(&mut v)?;
            }
            values.push(lambda);
            vectors.push(v);
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(numeric("build_fd", "eigenvalues not sorted after bisection"));
        }
        Ok((values, vectors))
    }

    fn inverse_iteration(&self, lambda: f64, scale: f64, seed: usize) -> Result<Vec<f64>> {
        let n = self.len();
        let shift = lambda + 4.0 * f64::EPSILON * scale;
        let lu = ShiftedLu::new(self, shift, f64::EPSILON * scale);
        let mut v: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.1 * ((i * 7 + seed * 13) % 11) as f64 / 11.0)
            .collect();
        normalise(&mut v)?;
        for _ in 0..4 {
            lu.solve(&mut v);
            normalise(&mut v)?;
        }
        Ok(v)
    }
}

fn normalise(v: &mut [f64]) -> Result<()> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(numeric("build_fd", "inverse iteration did not converge"));
    }
    v.iter_mut().for_each(|x| *x /= norm);
    Ok(())
}

/// LU of T − σI with partial pivoting (U has two super-diagonals).
struct ShiftedLu {
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    l: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn new(t: &Tridiagonal, sigma: f64, tiny: f64) -> Self {
        let n = t.len();
        let mut u0 = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut l = vec![0.0; n];
        let mut swapped = vec![false; n];
        // Current pivot row: (d, e, f) at columns (i, i+1, i+2).
        let mut d = t.diag[0] - sigma;
        let mut e = if n > 1 { t.off[0] } else { 0.0 };
        let mut f = 0.0;
        for i in 0..n {
            if i + 1 == n {
                u0[i] = if d.abs() < tiny { tiny } else { d };
                break;
            }
            let b = t.off[i];
            let next_d = t.diag[i + 1] - sigma;
            let next_e = if i + 2 < n { t.off[i + 1] } else { 0.0 };
            if b.abs() > d.abs() {
                swapped[i] = true;
                u0[i] = b;
                u1[i] = next_d;
                u2[i] = next_e;
                let m = d / b;
                l[i] = m;
                d = e - m * next_d;
                e = f - m * next_e;
            } else {
                let piv = if d.abs() < tiny { tiny } else { d };
                u0[i] = piv;
                u1[i] = e;
                u2[i] = f;
                let m = b / piv;
                l[i] = m;
                d = next_d - m * e;
                e = next_e - m * f;
            }
            f = 0.0;
        }
        Self { u0, u1, u2, l, swapped }
    }

    fn solve(&self, v: &mut [f64]) {
        let n = v.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                v.swap(i, i + 1);
            }
            v[i + 1] -= self.l[i] * v[i];
        }
        for i in (0..n).rev() {
            let mut s = v[i];
            if i + 1 < n {
                s -= self.u1[i] * v[i + 1];
            }
            if i + 2 < n {
                s -= self.u2[i] * v[i + 2];
            }
            v[i] = s / self.u0[i];
        }
    }
}
