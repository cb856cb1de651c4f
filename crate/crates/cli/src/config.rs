//! Experiment descriptions. TOML or JSON text is parsed into
//! [`ExperimentConfig`]; every strategy is a registry name plus a flat table
//! of parameters.

use std::path::PathBuf;

use dirac_core::action::FresnelRoute;
use dirac_core::cylinder::ProjectionHierarchy;
use dirac_core::mean::{StoppingRule, DEFAULT_TRACE_STRIDE};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

pub const DEFAULT_LEVEL: f64 = 0.999;
pub const DEFAULT_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Estimate,
    Certify,
    Oracle,
    FresnelScan,
    Compare,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Estimate => "estimate",
            Mode::Certify => "certify",
            Mode::Oracle => "oracle",
            Mode::FresnelScan => "fresnel-scan",
            Mode::Compare => "compare",
        }
    }

    pub fn needs_function(self) -> bool {
        matches!(self, Mode::Estimate | Mode::Oracle | Mode::Compare)
    }
}

/// A registry name and its parameters, e.g. `{ kind = "halton", offset = 1 }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategySpec {
    pub kind: String,
    #[serde(flatten)]
    pub params: Map<String, Value>,
}

impl StrategySpec {
    pub fn named(kind: &str) -> Self {
        Self { kind: kind.to_string(), params: Map::new() }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub kind: String,
    /// Quantile family applied to every coordinate of the cube points.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pullback: Option<StrategySpec>,
    #[serde(flatten)]
    pub params: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<StrategySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<StrategySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regularizer: Option<StrategySpec>,
}

impl Default for PolicySpec {
    fn default() -> Self {
        Self { kind: "constant".into(), density: None, action: None, regularizer: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertifySpec {
    /// Points tested per rank; the budget when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    /// Bins per axis; chosen per rank when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    pub level: f64,
}

impl Default for CertifySpec {
    fn default() -> Self {
        Self { samples: None, bins: None, level: DEFAULT_LEVEL }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FresnelSpec {
    pub curvature: f64,
    pub sigmas: Vec<f64>,
    pub route: FresnelRoute,
}

impl Default for FresnelSpec {
    fn default() -> Self {
        Self { curvature: 1.0, sigmas: vec![1.0, 2.0, 4.0], route: FresnelRoute::Pullback }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareSpec {
    /// Absolute tolerance on `|estimate - oracle|`.
    pub tolerance: f64,
}

impl Default for CompareSpec {
    fn default() -> Self {
        Self { tolerance: DEFAULT_TOLERANCE }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    pub trace: String,
    pub summary: String,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: None, trace: "trace.csv".into(), summary: "summary.json".into() }
    }
}

fn default_stride() -> u64 {
    DEFAULT_TRACE_STRIDE
}

fn default_blocks() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub mode: Mode,
    pub budget: u64,
    #[serde(default = "default_stride")]
    pub trace_stride: u64,
    #[serde(default = "default_blocks")]
    pub blocks: usize,
    pub source: SourceSpec,
    #[serde(default)]
    pub policy: PolicySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<StrategySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hierarchy: Option<ProjectionHierarchy>,
    #[serde(default)]
    pub stopping: StoppingRule,
    #[serde(default)]
    pub certify: CertifySpec,
    #[serde(default)]
    pub fresnel: FresnelSpec,
    #[serde(default)]
    pub compare: CompareSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

/// Command-line values that take precedence over the document.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub mode: Option<Mode>,
    pub budget: Option<u64>,
    pub blocks: Option<usize>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn apply(&mut self, overrides: &Overrides) -> Result<(), ValidationError> {
        if let Some(mode) = overrides.mode {
            self.mode = mode;
        }
        if let Some(budget) = overrides.budget {
            self.budget = budget;
        }
        if let Some(blocks) = overrides.blocks {
            self.blocks = blocks;
        }
        if let Some(seed) = overrides.seed {
            if self.source.kind != "pseudorandom" {
                return Err(ValidationError::new(
                    "seed",
                    format!("source {:?} takes no seed", self.source.kind),
                ));
            }
            self.source.params.insert("seed".into(), seed.into());
        }
        if let Some(dir) = &overrides.out_dir {
            self.output.dir = Some(dir.clone());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at line {line}, column {column} (field `{field}`): {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    /// Dotted path of the offending key, `.` when it is the document itself.
    pub field: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid `{field}`: {message}")]
pub struct ValidationError {
    pub field: String,
    pub message: String,
}

impl ValidationError {
    pub fn new(field: impl Into<String>, message: impl ToString) -> Self {
        Self { field: field.into(), message: message.to_string() }
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |nl| before.len() - nl - 1) + 1;
    (line, column)
}

/// Reads a JSON document when the first non-blank character is `{`, TOML
/// otherwise. Defaults are filled; cross-field checks happen in
/// [`crate::wiring::Experiment::build`].
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ParseError> {
    if text.trim_start().starts_with('{') {
        let mut de = serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let field = e.path().to_string();
            let inner = e.into_inner();
            ParseError { line: inner.line(), column: inner.column(), field, message: inner.to_string() }
        })
    } else {
        let de = toml::Deserializer::new(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            let inner = e.into_inner();
            let (line, column) = inner.span().map_or((0, 0), |s| line_col(text, s.start));
            ParseError { line, column, field, message: inner.message().trim().to_string() }
        })
    }
}
