//! Deterministic point sequences on the infinite cube `[0,1)^N` and their
//! coordinatewise pullbacks to `R^N`.
//!
//! Every source is a pure indexed function `(n, k) -> x_{n,k}`. A point of
//! rank `d` is just the first `d` coordinates, so truncation consistency holds
//! by construction: nothing is ever computed past the rank a consumer asks for.

mod convergent;
mod discrepancy;
mod equidistribution;
mod halton;
mod pseudorandom;
mod pullback;
mod weyl;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use convergent::{convergent_source, ConvergentSource};
pub use discrepancy::star_discrepancy;
pub use equidistribution::{chi_square_threshold, equidistribution_statistic, EquidistributionReport};
pub use halton::{halton_source, nth_prime, radical_inverse, HaltonSource};
pub use pseudorandom::{pseudorandom_source, PseudorandomSource};
pub use pullback::{
    pullback_source, NormalQuantile, PullbackSource, Quantile, QuantileFamily, UniformQuantile,
};
pub use weyl::{pi_power_generators, weyl_source, weyl_source_default, Generator, WeylSource};

/// Where the coordinates of a source live.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Codomain {
    UnitCube,
    RealLineProduct,
}

/// The rank-`d` truncation `P_d(x_n)` of a sequence element.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Self { coords }
    }

    pub fn rank(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }
}

impl AsRef<[f64]> for Point {
    fn as_ref(&self) -> &[f64] {
        &self.coords
    }
}

/// An indexed family `n -> x_n` of points with lazily computed coordinates.
///
/// Implementors must be pure: `coordinate(n, k)` depends only on `(n, k)` and
/// the parameters fixed at construction.
pub trait PointSource: Send + Sync + fmt::Debug {
    /// Registry name of the strategy.
    fn kind(&self) -> &'static str;

    fn codomain(&self) -> Codomain;

    /// Largest rank this source can provide, `None` when unbounded.
    fn max_rank(&self) -> Option<usize> {
        None
    }

    /// Coordinate `k` (0-based) of the `n`-th point.
    fn coordinate(&self, n: u64, k: usize) -> Result<f64>;

    /// Writes the first `out.len()` coordinates of point `n` into `out`.
    fn fill(&self, n: u64, out: &mut [f64]) -> Result<()> {
        if let Some(max) = self.max_rank() {
            if out.len() > max {
                return Err(Error::RankUnavailable { coordinate: max, rank: max });
            }
        }
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = self.coordinate(n, k)?;
        }
        Ok(())
    }

    /// The rank-`d` truncation of the `n`-th point.
    fn point_at(&self, n: u64, d: usize) -> Result<Point> {
        let mut coords = vec![0.0; d];
        self.fill(n, &mut coords)?;
        Ok(Point::new(coords))
    }
}

impl<S: PointSource + ?Sized> PointSource for Arc<S> {
    fn kind(&self) -> &'static str {
        (**self).kind()
    }
    fn codomain(&self) -> Codomain {
        (**self).codomain()
    }
    fn max_rank(&self) -> Option<usize> {
        (**self).max_rank()
    }
    fn coordinate(&self, n: u64, k: usize) -> Result<f64> {
        (**self).coordinate(n, k)
    }
    fn fill(&self, n: u64, out: &mut [f64]) -> Result<()> {
        (**self).fill(n, out)
    }
}

/// Every point equals the same constant vector. Fails any equidistribution test.
#[derive(Debug, Clone)]
pub struct ConstantSource {
    value: f64,
}

pub fn constant_source(value: f64) -> Result<ConstantSource> {
    if !(0.0..1.0).contains(&value) {
        return Err(Error::InvalidArgument(format!(
            "constant source value {value} outside [0,1)"
        )));
    }
    Ok(ConstantSource { value })
}

impl PointSource for ConstantSource {
    fn kind(&self) -> &'static str {
        "constant"
    }
    fn codomain(&self) -> Codomain {
        Codomain::UnitCube
    }
    fn coordinate(&self, _n: u64, _k: usize) -> Result<f64> {
        Ok(self.value)
    }
}

/// `x_{n,k} = n` for every coordinate. Pairs with index-phase actions to build
/// adversarial weight sequences such as `S(x_n) = pi * n`.
#[derive(Debug, Clone, Default)]
pub struct IndexSource;

impl PointSource for IndexSource {
    fn kind(&self) -> &'static str {
        "index"
    }
    fn codomain(&self) -> Codomain {
        Codomain::RealLineProduct
    }
    fn coordinate(&self, n: u64, _k: usize) -> Result<f64> {
        Ok(n as f64)
    }
}

/// Restricts a source to its first `rank` coordinates.
#[derive(Debug, Clone)]
pub struct Truncated<S> {
    inner: S,
    rank: usize,
}

impl<S: PointSource> Truncated<S> {
    pub fn new(inner: S, rank: usize) -> Self {
        Self { inner, rank }
    }
}

impl<S: PointSource> PointSource for Truncated<S> {
    fn kind(&self) -> &'static str {
        self.inner.kind()
    }
    fn codomain(&self) -> Codomain {
        self.inner.codomain()
    }
    fn max_rank(&self) -> Option<usize> {
        Some(self.inner.max_rank().map_or(self.rank, |r| r.min(self.rank)))
    }
    fn coordinate(&self, n: u64, k: usize) -> Result<f64> {
        if k >= self.rank {
            return Err(Error::RankUnavailable { coordinate: k, rank: self.rank });
        }
        self.inner.coordinate(n, k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncated_source_refuses_higher_coordinates() {
        let src = Truncated::new(halton_source(0), 2);
        assert!(src.point_at(5, 2).is_ok());
        assert!(matches!(
            src.point_at(5, 3),
            Err(Error::RankUnavailable { .. })
        ));
        assert_eq!(src.point_at(5, 2).unwrap(), halton_source(0).point_at(5, 2).unwrap());
    }

    #[test]
    fn constant_source_rejects_values_outside_cube() {
        assert!(constant_source(1.0).is_err());
        assert!(constant_source(-0.1).is_err());
        assert_eq!(constant_source(0.3).unwrap().point_at(9, 3).unwrap().coords(), &[0.3; 3]);
    }

    #[test]
    fn index_source_repeats_the_index() {
        assert_eq!(IndexSource.point_at(7, 2).unwrap().coords(), &[7.0, 7.0]);
    }
}
