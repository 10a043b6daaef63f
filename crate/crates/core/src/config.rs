//! TOML run configuration: sections `[weight]`, `[operator]`, `[problem]`,
//! `[numerics]` and an optional `[verify]`. Every section has defaults, so an
//! empty document describes μ ≡ 1 on (0, π) with u₀ = sin x.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelConfig;
use crate::oracle::{OracleConfig, OracleProblem};
use crate::problem::{FieldSpec, OperatorSpec, SourceSpec, TimeGrid};
use crate::solver::{DuhamelConfig, ModalSource, ProblemSpec, Source};
use crate::spectral::SpectralBasis;
use crate::verify::VerifyConfig;
use crate::weight::WeightFunction;

fn default_horizon() -> f64 {
    1.0
}

fn default_kappas() -> Vec<f64> {
    vec![0.5, 1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    #[serde(rename = "T", default = "default_horizon")]
    pub horizon: f64,
    #[serde(default)]
    pub times: TimeGrid,
    #[serde(default = "default_initial")]
    pub initial: FieldSpec,
    #[serde(default)]
    pub source: SourceSpec,
    /// γ with u₀ ∈ D(A^γ), when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regularity: Option<f64>,
    /// κ values for the norms output.
    #[serde(default = "default_kappas")]
    pub kappa: Vec<f64>,
}

fn default_initial() -> FieldSpec {
    FieldSpec::Sine { k: 1, amplitude: 1.0 }
}

impl Default for ProblemSection {
    fn default() -> Self {
        Self {
            horizon: default_horizon(),
            times: TimeGrid::default(),
            initial: default_initial(),
            source: SourceSpec::default(),
            regularity: None,
            kappa: default_kappas(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSettings {
    pub dt: f64,
    pub alpha_nodes: usize,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self { dt: 1e-3, alpha_nodes: 32 }
    }
}

/// Modes (1-based) and times tabulated by the `kernel` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelTableSettings {
    pub modes: Vec<usize>,
    pub times: Vec<f64>,
}

impl Default for KernelTableSettings {
    fn default() -> Self {
        Self { modes: vec![1, 4, 16], times: vec![0.01, 0.1, 1.0, 10.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    pub seed: u64,
    pub kernel: KernelConfig,
    pub duhamel: DuhamelConfig,
    pub oracle: OracleSettings,
    pub table: KernelTableSettings,
}

/// A parsed configuration document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunDocument {
    #[serde(default = "constant_weight")]
    pub weight: WeightFunction,
    #[serde(default)]
    pub operator: OperatorSpec,
    #[serde(default)]
    pub problem: ProblemSection,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub verify: VerifyConfig,
}

fn constant_weight() -> WeightFunction {
    WeightFunction::constant(1.0, 0.5, 0.25).expect("constant weight is valid")
}

impl Default for RunDocument {
    fn default() -> Self {
        Self {
            weight: constant_weight(),
            operator: OperatorSpec::default(),
            problem: ProblemSection::default(),
            numerics: Numerics::default(),
            verify: VerifyConfig::default(),
        }
    }
}

/// 1-based line of a byte offset.
fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

/// Dotted key at a byte offset: the enclosing `[table]` header plus the key
/// on that line, when there is one.
fn key_at(text: &str, offset: usize) -> String {
    let offset = offset.min(text.len());
    let line_start = text[..offset].rfind('\n').map_or(0, |p| p + 1);
    let line_end = text[offset..].find('\n').map_or(text.len(), |p| offset + p);
    let line = text[line_start..line_end].trim();
    let mut section = String::new();
    for prev in text[..line_start].lines().rev() {
        let p = prev.trim();
        if p.starts_with('[') && p.ends_with(']') {
            section = p.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            break;
        }
    }
    if line.starts_with('[') {
        return line.trim_matches(|c| c == '[' || c == ']').trim().to_string();
    }
    let key = line.split('=').next().unwrap_or("").trim();
    match (section.is_empty(), key.is_empty()) {
        (true, _) => key.to_string(),
        (false, true) => section,
        (false, false) => format!("{section}.{key}"),
    }
}

/// Parses and validates a configuration document. Schema errors report the
/// line and dotted key; invariant violations name the invariant.
pub fn parse_config(text: &str) -> Result<RunDocument> {
    let doc: RunDocument = toml::from_str(text).map_err(|e| {
        let (key, line) = match e.span() {
            Some(span) => (key_at(text, span.start), Some(line_of(text, span.start))),
            None => ("<document>".to_string(), None),
        };
        let msg = e.message().trim().to_string();
        Error::Config {
            key,
            detail: match line {
                Some(l) => format!("line {l}: {msg}"),
                None => msg,
            },
        }
    })?;
    doc.validate()?;
    Ok(doc)
}

impl RunDocument {
    /// Canonical text; parses back to an equal document.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config { key: "<document>".into(), detail: e.to_string() })
    }

    /// Checks invariants that serde cannot see.
    pub fn validate(&self) -> Result<()> {
        let p = &self.problem;
        if !(p.horizon > 0.0 && p.horizon.is_finite()) {
            return Err(Error::Config { key: "problem.T".into(), detail: format!("T = {} must be positive", p.horizon) });
        }
        p.times.times(p.horizon)?;
        p.source.profile.validate()?;
        for &k in &p.kappa {
            if !(0.0..=1.0).contains(&k) {
                return Err(Error::Config { key: "problem.kappa".into(), detail: format!("kappa = {k} not in [0,1]") });
            }
        }
        if let Some(g) = p.regularity {
            if !(g > 0.0 && g <= 1.0) {
                return Err(Error::Config { key: "problem.regularity".into(), detail: format!("gamma = {g} not in (0,1]") });
            }
        }
        if self.operator.modes == 0 || self.operator.points < 3 {
            return Err(Error::Config { key: "operator".into(), detail: "need N >= 1 and M >= 3".into() });
        }
        if self.operator.modes > self.operator.points - 2 {
            return Err(Error::Config {
                key: "operator.N".into(),
                detail: format!("N = {} exceeds the M - 2 = {} interior points", self.operator.modes, self.operator.points - 2),
            });
        }
        let o = &self.numerics.oracle;
        if !(o.dt > 0.0) || o.alpha_nodes == 0 {
            return Err(Error::Config { key: "numerics.oracle".into(), detail: "need dt > 0 and alpha_nodes >= 1".into() });
        }
        let k = &self.numerics.kernel;
        if !(k.theta > std::f64::consts::FRAC_PI_2 && k.theta < std::f64::consts::PI) {
            return Err(Error::Config { key: "numerics.kernel.theta".into(), detail: format!("theta = {} not in (pi/2, pi)", k.theta) });
        }
        if self.numerics.table.modes.iter().any(|&n| n == 0 || n > self.operator.modes) {
            return Err(Error::Config {
                key: "numerics.table.modes".into(),
                detail: format!("modes must lie in 1..={}", self.operator.modes),
            });
        }
        if self.numerics.table.times.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return Err(Error::Config { key: "numerics.table.times".into(), detail: "times must be positive".into() });
        }
        Ok(())
    }

    pub fn build_basis(&self) -> Result<SpectralBasis> {
        self.operator.build_basis()
    }

    pub fn output_times(&self) -> Result<Vec<f64>> {
        self.problem.times.times(self.problem.horizon)
    }

    /// The spectral problem on `basis`.
    pub fn build_problem(&self, basis: Arc<SpectralBasis>) -> Result<ProblemSpec> {
        let initial = self.problem.initial.coefficients(&basis)?;
        let mut problem = ProblemSpec::new(self.weight.clone(), basis.clone(), initial, self.problem.horizon)?;
        problem.regularity = self.problem.regularity;
        problem.kernel = self.numerics.kernel.clone();
        problem.duhamel = self.numerics.duhamel.clone();
        let src = &self.problem.source;
        if !src.spatial.is_zero() {
            let source: Arc<dyn Source> =
                Arc::new(ModalSource { coeffs: src.spatial.coefficients(&basis)?, profile: src.profile.clone() });
            problem = problem.with_source(source)?;
        }
        problem.validate()?;
        Ok(problem)
    }

    /// The same physical problem on the oracle's M-point grid.
    pub fn build_oracle(&self, basis: &SpectralBasis) -> Result<(OracleProblem, OracleConfig)> {
        let o = &self.numerics.oracle;
        let cfg = OracleConfig::new(o.dt, self.problem.horizon, o.alpha_nodes)?;
        let problem = OracleProblem {
            weight: self.weight.clone(),
            coeffs: self.operator.coefficients()?,
            points: basis.grid().len(),
            initial: self.problem.initial.grid_values(basis)?,
            source_spatial: self.problem.source.spatial.grid_values(basis)?,
            source_profile: self.problem.source.profile.clone(),
        };
        Ok((problem, cfg))
    }
}
