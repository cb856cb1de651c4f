use super::{Codomain, PointSource};
use crate::error::{Error, Result};

/// `x_n = clamp(target + rate^n * offset, 0, 1)` coordinatewise; the sequence
/// converges to `target`. Coordinates past the end of `target` or `offset`
/// repeat their last entry.
#[derive(Debug, Clone)]
pub struct ConvergentSource {
    target: Vec<f64>,
    offset: Vec<f64>,
    rate: f64,
}

pub fn convergent_source(target: Vec<f64>, offset: Vec<f64>, rate: f64) -> Result<ConvergentSource> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::InvalidArgument(format!("convergence rate {rate} not in (0,1)")));
    }
    if target.is_empty() || offset.is_empty() {
        return Err(Error::InvalidArgument("convergent source needs a target and an offset".into()));
    }
    if target.iter().chain(&offset).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("convergent source parameters must be finite".into()));
    }
    Ok(ConvergentSource { target, offset, rate })
}

fn repeat_last(values: &[f64], k: usize) -> f64 {
    values[k.min(values.len() - 1)]
}

impl ConvergentSource {
    pub fn limit(&self, d: usize) -> Vec<f64> {
        (0..d).map(|k| repeat_last(&self.target, k).clamp(0.0, 1.0)).collect()
    }
}

impl PointSource for ConvergentSource {
    fn kind(&self) -> &'static str {
        "convergent"
    }

    fn codomain(&self) -> Codomain {
        Codomain::UnitCube
    }

    fn coordinate(&self, n: u64, k: usize) -> Result<f64> {
        let scale = if n > i32::MAX as u64 { 0.0 } else { self.rate.powi(n as i32) };
        let value = repeat_last(&self.target, k) + scale * repeat_last(&self.offset, k);
        Ok(value.clamp(0.0, 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_decay_to_zero() {
        let src = convergent_source(vec![0.0], vec![1.0], 0.5).unwrap();
        assert_eq!(src.point_at(3, 1).unwrap().coords(), &[0.125]);
        assert_eq!(src.point_at(0, 2).unwrap().coords(), &[1.0, 1.0]);
        assert_eq!(src.point_at(2000, 1).unwrap().coords(), &[0.0]);
        assert_eq!(src.limit(2), vec![0.0, 0.0]);
    }

    #[test]
    fn clamps_into_the_cube() {
        let src = convergent_source(vec![0.9], vec![0.5], 0.5).unwrap();
        assert_eq!(src.coordinate(0, 0).unwrap(), 1.0);
        assert_eq!(src.coordinate(1, 0).unwrap(), 1.0);
        assert_eq!(src.coordinate(3, 0).unwrap(), 0.9625);
    }

    #[test]
    fn rejects_bad_rate() {
        assert!(convergent_source(vec![0.0], vec![1.0], 1.0).is_err());
        assert!(convergent_source(vec![0.0], vec![1.0], 0.0).is_err());
    }
}
