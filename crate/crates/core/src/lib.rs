//! Dirac means: normalized (possibly oscillatory) integrals over the infinite
//! cube computed as limits of self-normalized, complex-weighted barycenters
//! of point evaluations,
//!
//! ```text
//! tau(f) = lim_m  sum_{n<=m} alpha_n f(x_n) / sum_{n<=m} alpha_n .
//! ```
//!
//! Modules map onto the parts of that formula: [`seq`] provides the points
//! `x_n`, [`weights`] the weights `alpha_n`, [`cylinder`] the integrands `f`,
//! [`mean`] the limit, [`action`] the oscillatory weights `e^{-iS}` with a
//! product regularizer, and [`oracle`] independent quadrature references.
//! [`registry`] exposes every strategy by name.

pub mod action;
pub mod cylinder;
pub mod error;
pub mod functions;
pub mod mean;
pub mod oracle;
pub mod registry;
pub mod seq;
pub mod weights;

pub use error::{Error, Result};
pub use num_complex::Complex64;
