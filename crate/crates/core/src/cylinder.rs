//! Cylinder functions `f = f o P_d` on the infinite cube and the coordinate
//! projection hierarchy `P_{d_0}, P_{d_1}, ...`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::RealFunction;
use crate::mean::{run, ConvergenceReport, Parallelism, StoppingRule};
use crate::seq::{equidistribution_statistic, pseudorandom_source, EquidistributionReport, PointSource};
use crate::weights::WeightPolicy;

/// Number of random probe points used to check the cylinder property.
pub const PROBE_POINTS: u64 = 16;
const PROBE_SEED: u64 = 0x00C1_11AD_E125;

type BaseFn = dyn Fn(&[f64]) -> Complex64 + Send + Sync;

/// A function depending only on the first `rank` coordinates.
#[derive(Clone)]
pub struct CylinderFunction {
    rank: usize,
    base: Arc<BaseFn>,
    label: String,
}

impl fmt::Debug for CylinderFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CylinderFunction")
            .field("rank", &self.rank)
            .field("label", &self.label)
            .finish()
    }
}

pub fn cylinder_function<F>(rank: usize, base: F, label: &str) -> CylinderFunction
where
    F: Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
{
    CylinderFunction { rank, base: Arc::new(base), label: label.to_string() }
}

impl CylinderFunction {
    pub fn constant(value: Complex64) -> Self {
        cylinder_function(0, move |_| value, &format!("constant({value})"))
    }

    pub fn from_real(f: Arc<dyn RealFunction>) -> Self {
        let label = f.label();
        let rank = f.rank();
        cylinder_function(rank, move |x| Complex64::new(f.eval(x), 0.0), &label)
    }

    /// `a f + b g` with rank `max(rank f, rank g)`.
    pub fn linear_combination(a: Complex64, f: &Self, b: Complex64, g: &Self) -> Self {
        let (fa, ga) = (f.clone(), g.clone());
        let (rf, rg) = (f.rank, g.rank);
        cylinder_function(
            rf.max(rg),
            move |x| a * (fa.base)(&x[..rf]) + b * (ga.base)(&x[..rg]),
            &format!("{a}*{} + {b}*{}", f.label, g.label),
        )
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Applies the base function to the first `rank` coordinates of `x`.
    pub fn eval(&self, x: &[f64]) -> Result<Complex64> {
        if x.len() < self.rank {
            return Err(Error::RankExceeded { required: self.rank, got: x.len() });
        }
        Ok((self.base)(&x[..self.rank]))
    }

    /// Evaluates the base on rank `d+1` probe points and again with
    /// coordinate `d+1` replaced; any change means the base reads past its
    /// declared rank.
    pub fn probe(&self) -> Result<()> {
        let src = pseudorandom_source(PROBE_SEED);
        let d = self.rank;
        let mut point = vec![0.0; d + 1];
        for n in 0..PROBE_POINTS {
            src.fill(n, &mut point)?;
            let before = (self.base)(&point);
            point[d] = src.coordinate(n + PROBE_POINTS, d)?;
            let after = (self.base)(&point);
            let same = before == after
                || (before.re.to_bits() == after.re.to_bits() && before.im.to_bits() == after.im.to_bits());
            if !same {
                return Err(Error::CylinderViolation { label: self.label.clone(), rank: d });
            }
        }
        Ok(())
    }
}

/// Checks the cylinder property, then runs the Dirac mean at rank
/// `max(rank f, rank policy)`. Same arithmetic as [`run`].
pub fn integrate_cylinder<S, P>(
    f: &CylinderFunction,
    source: &S,
    policy: &P,
    budget: u64,
    rule: &StoppingRule,
    trace_stride: u64,
    parallelism: Parallelism,
) -> Result<ConvergenceReport>
where
    S: PointSource + ?Sized,
    P: WeightPolicy + ?Sized,
{
    f.probe()?;
    run(source, policy, f, budget, rule, trace_stride, parallelism)
}

/// Strictly increasing truncation ranks `d_0 < d_1 < ...`, `d_0 >= 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct ProjectionHierarchy {
    ranks: Vec<usize>,
}

impl ProjectionHierarchy {
    pub fn new(ranks: Vec<usize>) -> Result<Self> {
        if ranks.is_empty() || ranks[0] == 0 {
            return Err(Error::InvalidArgument("hierarchy ranks must start at >= 1".into()));
        }
        if ranks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(format!("hierarchy {ranks:?} is not strictly increasing")));
        }
        Ok(Self { ranks })
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }
}

impl TryFrom<Vec<usize>> for ProjectionHierarchy {
    type Error = Error;
    fn try_from(ranks: Vec<usize>) -> Result<Self> {
        Self::new(ranks)
    }
}

impl From<ProjectionHierarchy> for Vec<usize> {
    fn from(h: ProjectionHierarchy) -> Self {
        h.ranks
    }
}

/// Bins per axis used for a rank when none is configured: the largest count
/// up to `cap` keeping at least 5 expected points per cell.
pub fn auto_bins(rank: usize, n: u64, cap: usize) -> usize {
    let mut bins = 2usize;
    while bins < cap {
        let next = bins + 1;
        let cells = (next as u64).checked_pow(rank as u32);
        match cells.and_then(|c| c.checked_mul(5)) {
            Some(need) if need <= n => bins = next,
            _ => break,
        }
    }
    bins
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyReport {
    pub reports: Vec<EquidistributionReport>,
    pub pass: bool,
}

/// Equidistribution certificate of the pushforward at every rank of the hierarchy.
pub fn hierarchy_certify<S>(
    source: &S,
    hierarchy: &ProjectionHierarchy,
    n: u64,
    bins_per_axis: Option<usize>,
    level: f64,
) -> Result<HierarchyReport>
where
    S: PointSource + ?Sized,
{
    let reports = hierarchy
        .ranks()
        .par_iter()
        .map(|&rank| {
            let bins = bins_per_axis.unwrap_or_else(|| auto_bins(rank, n, 16));
            equidistribution_statistic(source, rank, n, bins, level)
        })
        .collect::<Result<Vec<_>>>()?;
    let pass = reports.iter().all(|r| r.pass);
    Ok(HierarchyReport { reports, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::{constant_source, halton_source};

    #[test]
    fn constant_cylinder() {
        let f = CylinderFunction::constant(Complex64::new(3.0, 0.0));
        assert_eq!(f.eval(&[]).unwrap().re, 3.0);
        assert_eq!(f.eval(&[0.1, 0.9]).unwrap().re, 3.0);
    }

    #[test]
    fn product_evaluation_ignores_tail() {
        let f = cylinder_function(2, |x| Complex64::new(x[0] * x[1], 0.0), "uv");
        assert_eq!(f.eval(&[0.5, 0.25, 0.3]).unwrap().re, 0.125);
        assert_eq!(f.eval(&[0.5, 0.25, 0.3]).unwrap(), f.eval(&[0.5, 0.25, 0.9]).unwrap());
        assert!(matches!(f.eval(&[0.5]), Err(Error::RankExceeded { required: 2, got: 1 })));
        assert!(f.probe().is_ok());
    }

    #[test]
    fn probe_catches_hidden_dependence() {
        let cheat = cylinder_function(1, |x| Complex64::new(x[0] + x.get(1).copied().unwrap_or(0.0), 0.0), "cheat");
        assert!(matches!(cheat.probe(), Err(Error::CylinderViolation { rank: 1, .. })));
        let zero_rank_cheat = cylinder_function(0, |x| Complex64::new(x.len() as f64 * x[0], 0.0), "c0");
        assert!(zero_rank_cheat.probe().is_err());
    }

    #[test]
    fn hierarchy_validation() {
        assert!(ProjectionHierarchy::new(vec![1, 2, 3]).is_ok());
        assert!(ProjectionHierarchy::new(vec![0, 2]).is_err());
        assert!(ProjectionHierarchy::new(vec![2, 2]).is_err());
        assert!(ProjectionHierarchy::new(vec![]).is_err());
        let parsed: std::result::Result<ProjectionHierarchy, _> = serde_json::from_str("[3, 1]");
        assert!(parsed.is_err());
    }

    #[test]
    fn auto_bins_respect_sample_floor() {
        assert_eq!(auto_bins(1, 10_000, 16), 16);
        assert_eq!(auto_bins(2, 10_000, 16), 16);
        assert_eq!(auto_bins(3, 10_000, 16), 12);
        assert_eq!(auto_bins(3, 80, 16), 2);
    }

    #[test]
    fn halton_hierarchy_passes() {
        let h = ProjectionHierarchy::new(vec![1, 2, 3]).unwrap();
        let report = hierarchy_certify(&halton_source(0), &h, 10_000, Some(2), 0.999).unwrap();
        assert!(report.pass, "{report:?}");
        assert_eq!(report.reports.len(), 3);
    }

    #[test]
    fn constant_hierarchy_fails_everywhere() {
        let h = ProjectionHierarchy::new(vec![1, 2, 3]).unwrap();
        let report = hierarchy_certify(&constant_source(0.3).unwrap(), &h, 10_000, None, 0.999).unwrap();
        assert!(!report.pass);
        assert!(report.reports.iter().all(|r| !r.pass));
    }

    #[test]
    fn singleton_hierarchy_is_single_statistic() {
        let h = ProjectionHierarchy::new(vec![1]).unwrap();
        let report = hierarchy_certify(&halton_source(0), &h, 10_000, Some(16), 0.999).unwrap();
        let single = equidistribution_statistic(&halton_source(0), 1, 10_000, 16, 0.999).unwrap();
        assert_eq!(report.reports, vec![single]);
    }
}
