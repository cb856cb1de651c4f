//! Action functionals, product regularizers, and the oscillatory
//! (Fresnel-type) normalized integral
//! `int f xi e^{-iS} / int xi e^{-iS}` realized as a Dirac mean.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cylinder::{integrate_cylinder, CylinderFunction};
use crate::error::{Error, Result};
use crate::functions::{QuadraticForm, RealFunction};
use crate::mean::{ConvergenceReport, Estimate, Parallelism, StoppingRule};
use crate::oracle::complex_gaussian_moment;
use crate::seq::{
    pullback_source, NormalQuantile, PointSource, Quantile, QuantileFamily, UniformQuantile,
};
use crate::weights::{oscillatory_policy, product_regularized_policy, WeightPolicy};

/// Largest rank accepted for quadratic actions.
pub const MAX_QUADRATIC_RANK: usize = 16;

#[derive(Clone)]
pub enum ActionKind {
    Quadratic(QuadraticForm),
    Custom { label: String, eval: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync> },
}

/// A real action `S` reading the first `rank` coordinates.
#[derive(Clone)]
pub struct ActionFunctional {
    rank: usize,
    kind: ActionKind,
}

impl fmt::Debug for ActionFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ActionKind::Quadratic(q) => f.debug_tuple("Quadratic").field(q).finish(),
            ActionKind::Custom { label, .. } => write!(f, "Custom({label}, rank {})", self.rank),
        }
    }
}

/// `S(x) = 1/2 x^T A x + b^T x + c0`.
pub fn quadratic_action(matrix: Vec<Vec<f64>>, vector: Vec<f64>, constant: f64) -> Result<ActionFunctional> {
    let form = QuadraticForm::new(matrix, vector, constant)?;
    if form.dimension() > MAX_QUADRATIC_RANK {
        return Err(Error::InvalidArgument(format!(
            "quadratic action rank {} exceeds {MAX_QUADRATIC_RANK}",
            form.dimension()
        )));
    }
    Ok(ActionFunctional { rank: form.dimension(), kind: ActionKind::Quadratic(form) })
}

/// One-dimensional `S(x) = a x^2 / 2`.
pub fn curvature_action(a: f64) -> Result<ActionFunctional> {
    quadratic_action(vec![vec![a]], vec![0.0], 0.0)
}

/// `S(x) = pi * x_1`. On the index source (`x_n = n`) this is the alternating
/// phase `S(x_n) = pi n`, whose weights `(-1)^n` cancel in pairs.
pub fn alternating_action() -> ActionFunctional {
    custom_action("alternating", 1, |x| std::f64::consts::PI * x[0])
}

pub fn custom_action<F>(label: &str, rank: usize, eval: F) -> ActionFunctional
where
    F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
{
    ActionFunctional {
        rank,
        kind: ActionKind::Custom { label: label.to_string(), eval: Arc::new(eval) },
    }
}

impl ActionFunctional {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn kind(&self) -> &ActionKind {
        &self.kind
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.kind {
            ActionKind::Quadratic(q) => q.eval(x),
            ActionKind::Custom { eval, .. } => eval(&x[..self.rank]),
        }
    }

    /// The same action shifted by a constant phase.
    pub fn shifted(&self, c0: f64) -> Self {
        match &self.kind {
            ActionKind::Quadratic(q) => Self {
                rank: self.rank,
                kind: ActionKind::Quadratic(q.with_constant(q.constant() + c0)),
            },
            ActionKind::Custom { label, eval } => {
                let inner = Arc::clone(eval);
                custom_action(&format!("{label}+{c0}"), self.rank, move |x| inner(x) + c0)
            }
        }
    }

    /// Curvature `a` when the action is one-dimensional and purely quadratic.
    pub fn curvature_1d(&self) -> Option<f64> {
        match &self.kind {
            ActionKind::Quadratic(q)
                if q.dimension() == 1 && q.vector()[0] == 0.0 && q.constant() == 0.0 =>
            {
                Some(q.matrix()[0][0])
            }
            _ => None,
        }
    }
}

/// Gaussian product regularizer `xi(x) = prod_k exp(-x_k^2 / (2 sigma_k^2))`.
#[derive(Debug, Clone, PartialEq)]
pub struct Regularizer {
    widths: Vec<f64>,
}

pub fn gaussian_regularizer(widths: Vec<f64>) -> Result<Regularizer> {
    if widths.is_empty() {
        return Err(Error::InvalidArgument("regularizer needs at least one width".into()));
    }
    if let Some(&w) = widths.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
        return Err(Error::NonpositiveWidth(w));
    }
    Ok(Regularizer { widths })
}

impl Regularizer {
    pub fn rank(&self) -> usize {
        self.widths.len()
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn factor(&self, k: usize, t: f64) -> f64 {
        let s = self.widths[k];
        (-t * t / (2.0 * s * s)).exp()
    }

    pub fn log_value(&self, x: &[f64]) -> f64 {
        self.widths
            .iter()
            .zip(x)
            .map(|(s, t)| -t * t / (2.0 * s * s))
            .sum()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.widths.iter().enumerate().map(|(k, _)| self.factor(k, x[k])).product()
    }

    /// Quantiles of the normalized factor measures `xi_k / int xi_k`.
    pub fn quantile_family(&self) -> QuantileFamily {
        let factors: Vec<Arc<dyn Quantile>> = self
            .widths
            .iter()
            .map(|&s| Arc::new(NormalQuantile::new(0.0, s).expect("validated width")) as Arc<dyn Quantile>)
            .collect();
        QuantileFamily::new(factors).expect("nonempty widths")
    }

    /// Truncation half-length `8 max(sigma, 1)` of the regularized domain.
    pub fn truncation(&self) -> f64 {
        8.0 * self.widths.iter().copied().fold(1.0, f64::max)
    }
}

/// How the regularizer enters the Dirac mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FresnelRoute {
    /// Points pulled back through the normalized `xi` product measure, weights `e^{-iS}`.
    #[default]
    Pullback,
    /// Points uniform on `[-L, L]^d`, weights `xi e^{-iS}`.
    WeightBorne,
}

/// Wires a cube source, action and regularizer into the point source and
/// weight policy of the chosen route.
pub fn fresnel_setup<S>(
    base: S,
    action: &ActionFunctional,
    regularizer: &Regularizer,
    route: FresnelRoute,
) -> Result<(Arc<dyn PointSource>, Arc<dyn WeightPolicy>)>
where
    S: PointSource + 'static,
{
    if action.rank() > regularizer.rank() {
        return Err(Error::InvalidArgument(format!(
            "action rank {} exceeds regularizer rank {}",
            action.rank(),
            regularizer.rank()
        )));
    }
    match route {
        FresnelRoute::Pullback => {
            let source = pullback_source(base, regularizer.quantile_family())?;
            let policy = oscillatory_policy(action.clone());
            Ok((Arc::new(source), Arc::new(policy)))
        }
        FresnelRoute::WeightBorne => {
            let l = regularizer.truncation();
            let family = QuantileFamily::iid(Arc::new(UniformQuantile::new(-l, l)?));
            let source = pullback_source(base, family)?;
            let policy = product_regularized_policy(regularizer.clone(), action.clone());
            Ok((Arc::new(source), Arc::new(policy)))
        }
    }
}

/// Estimates `int f xi e^{-iS} dx / int xi e^{-iS} dx` as the Dirac mean of a
/// cube sequence transported by `route`.
#[allow(clippy::too_many_arguments)]
pub fn oscillatory_mean<S>(
    base: S,
    action: &ActionFunctional,
    regularizer: &Regularizer,
    f: &CylinderFunction,
    route: FresnelRoute,
    budget: u64,
    rule: &StoppingRule,
    trace_stride: u64,
    parallelism: Parallelism,
) -> Result<ConvergenceReport>
where
    S: PointSource + 'static,
{
    if f.rank() > regularizer.rank() {
        return Err(Error::InvalidArgument(format!(
            "function rank {} exceeds regularizer rank {}",
            f.rank(),
            regularizer.rank()
        )));
    }
    let (source, policy) = fresnel_setup(base, action, regularizer, route)?;
    integrate_cylinder(f, &source, policy.as_ref(), budget, rule, trace_stride, parallelism)
}

/// One row of a regularization scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanPoint {
    pub sigma: f64,
    pub estimate: Estimate,
    pub closed_form: Complex64,
    pub converged: bool,
    pub n_used: u64,
}

impl ScanPoint {
    /// Distance of the estimate to the unregularized value `-i/a`.
    pub fn distance_to_limit(&self, curvature: f64) -> Option<f64> {
        let limit = Complex64::new(0.0, -1.0 / curvature);
        self.estimate.value().map(|v| (v - limit).norm())
    }
}

/// Runs the second-moment oscillatory mean for `S = a x^2/2` over increasing
/// Gaussian widths. Estimates drift toward `-i/a` as the regularization is removed.
#[allow(clippy::too_many_arguments)]
pub fn fresnel_limit_scan<S>(
    base: S,
    curvature: f64,
    sigmas: &[f64],
    route: FresnelRoute,
    budget: u64,
    rule: &StoppingRule,
    trace_stride: u64,
    parallelism: Parallelism,
) -> Result<Vec<ScanPoint>>
where
    S: PointSource + Clone + 'static,
{
    if curvature == 0.0 || !curvature.is_finite() {
        return Err(Error::InvalidArgument("scan needs a nonzero finite curvature".into()));
    }
    if sigmas.is_empty() || sigmas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("sigma list must be nonempty and increasing".into()));
    }
    let action = curvature_action(curvature)?;
    let f = CylinderFunction::from_real(Arc::new(crate::functions::Polynomial::new(vec![0.0, 0.0, 1.0], 1)?));
    sigmas
        .par_iter()
        .map(|&sigma| {
            let regularizer = gaussian_regularizer(vec![sigma])?;
            let report = oscillatory_mean(
                base.clone(),
                &action,
                &regularizer,
                &f,
                route,
                budget,
                rule,
                trace_stride,
                parallelism,
            )?;
            Ok(ScanPoint {
                sigma,
                estimate: report.final_estimate,
                closed_form: complex_gaussian_moment(curvature, sigma, 2)?,
                converged: report.converged,
                n_used: report.n_used,
            })
        })
        .collect()
}
