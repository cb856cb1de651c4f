use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::{Codomain, PointSource};
use crate::error::{Error, Result};

/// Minimum expected count per cell for the chi-square approximation.
pub const MIN_EXPECTED_PER_CELL: u64 = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquidistributionReport {
    pub rank: usize,
    pub sample_count: u64,
    pub bins_per_axis: usize,
    pub statistic: f64,
    pub threshold: f64,
    pub level: f64,
    pub pass: bool,
}

/// Upper `level` quantile of the chi-square distribution with `df` degrees of freedom.
pub fn chi_square_threshold(df: u64, level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!("significance level {level} not in (0,1)")));
    }
    let dist = ChiSquared::new(df as f64)
        .map_err(|e| Error::InvalidArgument(format!("chi-square with {df} degrees of freedom: {e}")))?;
    Ok(dist.inverse_cdf(level))
}

/// Chi-square test of the bin counts of the first `n` rank-`rank` points
/// against the uniform distribution on `bins_per_axis^rank` equal cells.
pub fn equidistribution_statistic<S: PointSource + ?Sized>(
    source: &S,
    rank: usize,
    n: u64,
    bins_per_axis: usize,
    level: f64,
) -> Result<EquidistributionReport> {
    if source.codomain() != Codomain::UnitCube {
        return Err(Error::InvalidArgument(format!(
            "equidistribution needs a unit-cube source, got {}",
            source.kind()
        )));
    }
    if rank == 0 || bins_per_axis < 2 {
        return Err(Error::InvalidArgument(format!(
            "rank {rank} / bins per axis {bins_per_axis} too small"
        )));
    }
    let cells = (bins_per_axis as u64)
        .checked_pow(rank as u32)
        .filter(|c| c.checked_mul(MIN_EXPECTED_PER_CELL).is_some_and(|need| need <= n))
        .ok_or_else(|| {
            let cells = (bins_per_axis as u64).saturating_pow(rank as u32);
            Error::InsufficientSample {
                needed: cells.saturating_mul(MIN_EXPECTED_PER_CELL),
                cells,
                got: n,
            }
        })?;

    let mut counts = vec![0u64; cells as usize];
    let mut point = vec![0.0; rank];
    let bins = bins_per_axis as f64;
    for i in 0..n {
        source.fill(i, &mut point)?;
        let mut cell = 0usize;
        for &u in point.iter().rev() {
            let bin = ((u * bins) as usize).min(bins_per_axis - 1);
            cell = cell * bins_per_axis + bin;
        }
        counts[cell] += 1;
    }

    let expected = n as f64 / cells as f64;
    let statistic = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum::<f64>();
    let threshold = chi_square_threshold(cells - 1, level)?;
    Ok(EquidistributionReport {
        rank,
        sample_count: n,
        bins_per_axis,
        statistic,
        threshold,
        level,
        pass: statistic <= threshold,
    })
}
