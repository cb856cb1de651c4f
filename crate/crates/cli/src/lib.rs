//! Batch driver for Dirac-mean experiments: a TOML or JSON description names
//! a point source, weight policy and integrand from the registries, and a run
//! writes a CSV trace plus a JSON summary.
//!
//! Exit codes: 0 success, 1 config or runtime error, 2 degenerate
//! normalization, 3 no convergence within budget, 4 failed certification or
//! comparison verdict.

pub mod config;
pub mod execute;
pub mod wiring;

pub use config::{parse_config, ExperimentConfig, Mode, ParseError, ValidationError};
pub use execute::{execute, Outcome, RunError, RunSummary};
pub use wiring::Experiment;
