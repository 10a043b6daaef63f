//! Physical problem descriptors shared by the spectral solver and the oracle.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, invariant, Error, Result};
use crate::spectral::{build_exact_dirichlet_on, build_fd, EllipticCoefficients, Polynomial, SpectralBasis};

fn one() -> f64 {
    1.0
}
fn one_usize() -> usize {
    1
}

/// A spatial function, either named or given by basis coefficients.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    #[default]
    Zero,
    /// amplitude·sin(kπx/L)
    Sine {
        #[serde(default = "one_usize")]
        k: usize,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// amplitude·x(L − x)
    Parabola {
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// amplitude·φ_n (1-based n)
    Eigenmode {
        n: usize,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Σ c_n φ_n
    Modes { coeffs: Vec<f64> },
    /// c_n = λ_n^{−exponent}
    PowerLaw { exponent: f64 },
}

impl FieldSpec {
    pub fn is_zero(&self) -> bool {
        match self {
            FieldSpec::Zero => true,
            FieldSpec::Sine { amplitude, .. }
            | FieldSpec::Parabola { amplitude }
            | FieldSpec::Eigenmode { amplitude, .. } => *amplitude == 0.0,
            FieldSpec::Modes { coeffs } => coeffs.iter().all(|&c| c == 0.0),
            FieldSpec::PowerLaw { .. } => false,
        }
    }

    fn closed_form(&self, x: f64, length: f64) -> Option<f64> {
        match *self {
            FieldSpec::Zero => Some(0.0),
            FieldSpec::Sine { k, amplitude } => Some(amplitude * (k as f64 * PI * x / length).sin()),
            FieldSpec::Parabola { amplitude } => Some(amplitude * x * (length - x)),
            _ => None,
        }
    }

    /// Values on the basis grid.
    pub fn grid_values(&self, basis: &SpectralBasis) -> Result<Vec<f64>> {
        let l = basis.length();
        if self.closed_form(0.0, l).is_some() {
            let m = basis.grid().len();
            return Ok(basis
                .grid()
                .iter()
                .enumerate()
                .map(|(j, &x)| {
                    if j == 0 || j == m - 1 {
                        0.0
                    } else {
                        self.closed_form(x, l).unwrap_or(0.0)
                    }
                })
                .collect());
        }
        basis.synthesize(&self.coefficients(basis)?)
    }

    /// Coefficients in the basis (projection for named profiles).
    pub fn coefficients(&self, basis: &SpectralBasis) -> Result<Vec<f64>> {
        let n = basis.modes();
        match self {
            FieldSpec::Eigenmode { n: k, amplitude } => {
                if *k == 0 || *k > n {
                    return Err(domain("FieldSpec", format!("eigenmode {k} outside 1..={n}")));
                }
                let mut c = vec![0.0; n];
                c[k - 1] = *amplitude;
                Ok(c)
            }
            FieldSpec::Modes { coeffs } => {
                if coeffs.len() > n {
                    return Err(Error::Dimension { op: "FieldSpec", expected: n, found: coeffs.len() });
                }
                let mut c = coeffs.clone();
                c.resize(n, 0.0);
                Ok(c)
            }
            FieldSpec::PowerLaw { exponent } => {
                Ok(basis.eigenvalues().iter().map(|l| l.powf(-exponent)).collect())
            }
            _ => basis.project(&self.grid_values(basis)?),
        }
    }
}

/// Time profile multiplying a spatial source.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TimeProfile {
    #[default]
    Constant,
    /// 1 on [on, off), 0 elsewhere
    Step { on: f64, off: f64 },
    /// sin(2π·frequency·t + phase)
    Sine {
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    /// Unit-mass box of the given width centred at `center`.
    Bump { center: f64, width: f64 },
}

impl TimeProfile {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::Constant => 1.0,
            TimeProfile::Step { on, off } => {
                if t >= on && t < off {
                    1.0
                } else {
                    0.0
                }
            }
            TimeProfile::Sine { frequency, phase } => (2.0 * PI * frequency * t + phase).sin(),
            TimeProfile::Bump { center, width } => {
                if (t - center).abs() <= 0.5 * width {
                    1.0 / width
                } else {
                    0.0
                }
            }
        }
    }

    /// Points where the profile jumps.
    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            TimeProfile::Step { on, off } => vec![on, off],
            TimeProfile::Bump { center, width } => vec![center - 0.5 * width, center + 0.5 * width],
            _ => Vec::new(),
        }
    }

    pub fn sup(&self) -> f64 {
        match *self {
            TimeProfile::Bump { width, .. } => 1.0 / width,
            _ => 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            TimeProfile::Step { on, off } if !(on < off) => {
                Err(invariant("source_profile", format!("step needs on < off, got {on} >= {off}")))
            }
            TimeProfile::Bump { width, .. } if !(width > 0.0) => {
                Err(invariant("source_profile", format!("bump width {width} must be positive")))
            }
            TimeProfile::Sine { frequency, phase } if !(frequency.is_finite() && phase.is_finite()) => {
                Err(invariant("source_profile", "sine parameters must be finite"))
            }
            _ => Ok(()),
        }
    }
}

/// F(t, x) = profile(t)·spatial(x).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    #[serde(default)]
    pub spatial: FieldSpec,
    #[serde(default)]
    pub profile: TimeProfile,
}

/// Output times inside (0, T].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TimeGrid {
    /// t_k = kT/count, k = 1..=count
    Uniform { count: usize },
    /// count points from start to end, equally spaced in log t
    Geometric { start: f64, end: f64, count: usize },
    List { values: Vec<f64> },
}

impl Default for TimeGrid {
    fn default() -> Self {
        TimeGrid::Uniform { count: 10 }
    }
}

impl TimeGrid {
    pub fn times(&self, horizon: f64) -> Result<Vec<f64>> {
        let times: Vec<f64> = match self {
            TimeGrid::Uniform { count } => (1..=*count).map(|k| horizon * k as f64 / *count as f64).collect(),
            TimeGrid::Geometric { start, end, count } => {
                if !(*start > 0.0 && end > start && *count >= 2) {
                    return Err(invariant("time_grid", "geometric grid needs 0 < start < end and count >= 2"));
                }
                let ratio = (end / start).ln() / (*count - 1) as f64;
                (0..*count).map(|k| start * (ratio * k as f64).exp()).collect()
            }
            TimeGrid::List { values } => values.clone(),
        };
        if times.is_empty() {
            return Err(invariant("time_grid", "no output times"));
        }
        for w in times.windows(2) {
            if !(w[0] < w[1]) {
                return Err(invariant("time_grid", "times must increase strictly"));
            }
        }
        let (first, last) = (times[0], *times.last().unwrap());
        if !(first > 0.0) || last > horizon * (1.0 + 1e-12) {
            return Err(invariant(
                "time_grid",
                format!("times must lie in (0, T = {horizon}], got [{first}, {last}]"),
            ));
        }
        Ok(times)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisChoice {
    /// Closed-form sines; requires a ≡ 1, q ≡ 0.
    Exact,
    #[default]
    Fd,
}

fn default_a() -> Polynomial {
    Polynomial::constant(1.0)
}
fn default_q() -> Polynomial {
    Polynomial::constant(0.0)
}
fn default_length() -> f64 {
    PI
}
fn default_points() -> usize {
    201
}
fn default_modes() -> usize {
    64
}

/// Elliptic operator, grid and truncation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    #[serde(default = "default_a")]
    pub a: Polynomial,
    #[serde(default = "default_q")]
    pub q: Polynomial,
    #[serde(rename = "L", default = "default_length")]
    pub length: f64,
    #[serde(default = "one")]
    pub c_a: f64,
    /// Grid points including both ends.
    #[serde(rename = "M", default = "default_points")]
    pub points: usize,
    /// Retained modes.
    #[serde(rename = "N", default = "default_modes")]
    pub modes: usize,
    #[serde(default)]
    pub basis: BasisChoice,
}

impl Default for OperatorSpec {
    fn default() -> Self {
        Self {
            a: default_a(),
            q: default_q(),
            length: default_length(),
            c_a: 1.0,
            points: default_points(),
            modes: default_modes(),
            basis: BasisChoice::Fd,
        }
    }
}

impl OperatorSpec {
    pub fn coefficients(&self) -> Result<EllipticCoefficients> {
        EllipticCoefficients::new(self.a.clone(), self.q.clone(), self.c_a, self.length)
    }

    pub fn build_basis(&self) -> Result<SpectralBasis> {
        let coeffs = self.coefficients()?;
        match self.basis {
            BasisChoice::Fd => build_fd(&coeffs, self.points, self.modes),
            BasisChoice::Exact => {
                let trivial = |p: &Polynomial, v: f64| p.0.iter().enumerate().all(|(k, &c)| c == if k == 0 { v } else { 0.0 });
                if !trivial(&self.a, 1.0) || !trivial(&self.q, 0.0) {
                    return Err(invariant("exact_basis", "closed-form basis requires a = 1 and q = 0"));
                }
                build_exact_dirichlet_on(self.length, self.modes, self.points)
            }
        }
    }
}
