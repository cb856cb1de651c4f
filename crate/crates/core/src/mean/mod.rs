//! The Dirac-mean engine: streaming accumulation of weighted evaluations,
//! normalization with a relative degeneracy guard, a finite stopping rule,
//! and deterministic block-parallel merging.

mod accumulator;
mod run;
mod sum;

pub use accumulator::{Estimate, MeanAccumulator};
pub use run::{
    run, ConvergenceReport, Parallelism, StopReason, StoppingRule, TraceRow, DEFAULT_DEGENERACY_THRESHOLD,
    DEFAULT_MIN_SAMPLES, DEFAULT_REL_TOL, DEFAULT_TRACE_STRIDE, DEFAULT_WINDOW,
};
pub use sum::{ComplexSum, NeumaierSum};
