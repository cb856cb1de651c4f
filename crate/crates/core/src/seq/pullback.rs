use std::fmt;
use std::sync::Arc;

use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use super::{Codomain, PointSource};
use crate::error::{Error, Result};

/// Quantile function of a one-dimensional probability measure.
pub trait Quantile: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    /// `q(u)` for `u` strictly inside `(0,1)`.
    fn quantile(&self, u: f64) -> f64;

    /// Density of the measure, used by quadrature oracles.
    fn pdf(&self, x: f64) -> f64;

    /// Interval carrying all but a negligible (`< 1e-14`) part of the mass.
    fn effective_support(&self) -> (f64, f64);
}

#[derive(Debug, Clone)]
pub struct NormalQuantile {
    mean: f64,
    sd: f64,
    dist: Normal,
}

impl NormalQuantile {
    pub fn new(mean: f64, sd: f64) -> Result<Self> {
        let dist = Normal::new(mean, sd)
            .map_err(|e| Error::InvalidArgument(format!("normal({mean}, {sd}): {e}")))?;
        Ok(Self { mean, sd, dist })
    }

    pub fn standard() -> Self {
        Self::new(0.0, 1.0).expect("standard normal")
    }

    pub fn sd(&self) -> f64 {
        self.sd
    }
}

impl Quantile for NormalQuantile {
    fn name(&self) -> &'static str {
        "normal"
    }

    fn quantile(&self, u: f64) -> f64 {
        self.dist.inverse_cdf(u)
    }

    fn pdf(&self, x: f64) -> f64 {
        self.dist.pdf(x)
    }

    fn effective_support(&self) -> (f64, f64) {
        let half = 8.0 * self.sd.max(1.0);
        (self.mean - half, self.mean + half)
    }
}

/// Uniform measure on `[lo, hi]`; `[0,1]` gives the identity pullback.
#[derive(Debug, Clone)]
pub struct UniformQuantile {
    lo: f64,
    hi: f64,
}

impl UniformQuantile {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidArgument(format!("uniform interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn unit() -> Self {
        Self { lo: 0.0, hi: 1.0 }
    }
}

impl Quantile for UniformQuantile {
    fn name(&self) -> &'static str {
        "uniform"
    }

    fn quantile(&self, u: f64) -> f64 {
        if self.lo == 0.0 && self.hi == 1.0 {
            u
        } else {
            self.lo + (self.hi - self.lo) * u
        }
    }

    fn pdf(&self, x: f64) -> f64 {
        if (self.lo..=self.hi).contains(&x) {
            1.0 / (self.hi - self.lo)
        } else {
            0.0
        }
    }

    fn effective_support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }
}

/// Per-coordinate quantiles of a product measure. Coordinates past the end of
/// the list reuse the last factor.
#[derive(Debug, Clone)]
pub struct QuantileFamily {
    factors: Vec<Arc<dyn Quantile>>,
}

impl QuantileFamily {
    pub fn new(factors: Vec<Arc<dyn Quantile>>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidArgument("quantile family needs at least one factor".into()));
        }
        Ok(Self { factors })
    }

    pub fn iid(factor: Arc<dyn Quantile>) -> Self {
        Self { factors: vec![factor] }
    }

    pub fn standard_normal() -> Self {
        Self::iid(Arc::new(NormalQuantile::standard()))
    }

    pub fn factor(&self, k: usize) -> &Arc<dyn Quantile> {
        &self.factors[k.min(self.factors.len() - 1)]
    }

    pub fn quantile(&self, k: usize, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::QuantileDomain { u, coordinate: k });
        }
        Ok(self.factor(k).quantile(u))
    }

    /// Product density at the first `x.len()` coordinates.
    pub fn pdf(&self, x: &[f64]) -> f64 {
        x.iter().enumerate().map(|(k, &t)| self.factor(k).pdf(t)).product()
    }
}

/// Coordinatewise pullback of a cube source through a product measure.
#[derive(Debug, Clone)]
pub struct PullbackSource<S> {
    base: S,
    family: QuantileFamily,
}

pub fn pullback_source<S: PointSource>(base: S, family: QuantileFamily) -> Result<PullbackSource<S>> {
    if base.codomain() != Codomain::UnitCube {
        return Err(Error::InvalidArgument(format!(
            "pullback needs a unit-cube base, got {}",
            base.kind()
        )));
    }
    Ok(PullbackSource { base, family })
}

impl<S: PointSource> PullbackSource<S> {
    pub fn base(&self) -> &S {
        &self.base
    }

    pub fn family(&self) -> &QuantileFamily {
        &self.family
    }
}

impl<S: PointSource> PointSource for PullbackSource<S> {
    fn kind(&self) -> &'static str {
        "pullback"
    }

    fn codomain(&self) -> Codomain {
        Codomain::RealLineProduct
    }

    fn max_rank(&self) -> Option<usize> {
        self.base.max_rank()
    }

    fn coordinate(&self, n: u64, k: usize) -> Result<f64> {
        let u = self.base.coordinate(n, k)?;
        self.family.quantile(k, u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::{halton_source, weyl_source_default};

    #[test]
    fn normal_quantile_examples() {
        let q = NormalQuantile::standard();
        assert_eq!(q.quantile(0.5), 0.0);
        // Phi(1) = 0.841344746068543 from the error function.
        assert!((q.quantile(0.841_344_7) - 1.0).abs() < 1e-4);
        assert!((q.quantile(0.841_344_746_068_543) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_pullback_equals_base() {
        let base = halton_source(1);
        let pulled = pullback_source(base.clone(), QuantileFamily::iid(Arc::new(UniformQuantile::unit()))).unwrap();
        for n in 0..50 {
            assert_eq!(pulled.point_at(n, 3).unwrap(), base.point_at(n, 3).unwrap());
        }
    }

    #[test]
    fn zero_coordinate_is_outside_quantile_domain() {
        let pulled = pullback_source(weyl_source_default(0), QuantileFamily::standard_normal()).unwrap();
        assert!(matches!(
            pulled.point_at(0, 1),
            Err(Error::QuantileDomain { coordinate: 0, .. })
        ));
        let shifted = pullback_source(weyl_source_default(1), QuantileFamily::standard_normal()).unwrap();
        assert!(shifted.point_at(0, 2).is_ok());
    }

    #[test]
    fn family_repeats_last_factor() {
        let fam = QuantileFamily::new(vec![
            Arc::new(NormalQuantile::new(0.0, 1.0).unwrap()),
            Arc::new(NormalQuantile::new(0.0, 3.0).unwrap()),
        ])
        .unwrap();
        let u = 0.841_344_746_068_543;
        assert!((fam.quantile(5, u).unwrap() - 3.0).abs() < 1e-10);
        assert!((fam.pdf(&[0.0, 0.0]) - 1.0 / (2.0 * std::f64::consts::PI * 3.0)).abs() < 1e-15);
    }

    #[test]
    fn rejects_real_line_base() {
        let pulled = pullback_source(halton_source(1), QuantileFamily::standard_normal()).unwrap();
        assert!(pullback_source(pulled, QuantileFamily::standard_normal()).is_err());
    }
}
