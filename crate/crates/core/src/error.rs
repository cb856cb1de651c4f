use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("bad generator {value:?}: {reason}")]
    BadGenerator { value: String, reason: String },

    #[error("quantile undefined at u = {u} (coordinate {coordinate})")]
    QuantileDomain { u: f64, coordinate: usize },

    #[error("insufficient sample: {needed} points needed for {cells} cells, got {got}")]
    InsufficientSample { needed: u64, cells: u64, got: u64 },

    #[error("star discrepancy is implemented for rank 1 and 2 only (got rank {0})")]
    RankUnsupported(usize),

    #[error("coordinate {coordinate} unavailable: source only provides rank {rank}")]
    RankUnavailable { coordinate: usize, rank: usize },

    #[error("negative density {value} at a sampled point")]
    NegativeDensity { value: f64 },

    #[error("weight overflow: action {action} is below the exp(-S) saturation bound")]
    WeightOverflow { action: f64 },

    #[error("non-finite input: weight {weight}, value {value}")]
    NonFiniteInput { weight: String, value: String },

    #[error("estimate requested from an empty accumulator")]
    EmptyAccumulator,

    #[error("function of rank {required} evaluated on a point of rank {got}")]
    RankExceeded { required: usize, got: usize },

    #[error("cylinder function {label:?} depends on coordinates beyond its declared rank {rank}")]
    CylinderViolation { label: String, rank: usize },

    #[error("matrix is not symmetric (max asymmetry {0})")]
    AsymmetricMatrix(f64),

    #[error("nonpositive regularizer width {0}")]
    NonpositiveWidth(f64),

    #[error("quadrature did not converge within {cells} cells per axis (last change {last_change:e})")]
    NoConvergence { cells: usize, last_change: f64 },

    #[error("oracle normalization is degenerate: |Z| = {z_abs:e}, total variation {total:e}")]
    DegenerateOracle { z_abs: f64, total: f64 },

    #[error("unsupported moment {0} (only 0 and 2)")]
    UnsupportedMoment(u32),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown {kind} {name:?}")]
    UnknownName { kind: &'static str, name: String },
}
