use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::sum::{ComplexSum, NeumaierSum};
use crate::error::{Error, Result};

/// Value of a partial Dirac mean: a number, or the marker for a normalization
/// that cancelled below the degeneracy threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimate {
    Value(Complex64),
    Degenerate,
}

impl Estimate {
    pub fn value(&self) -> Option<Complex64> {
        match self {
            Estimate::Value(v) => Some(*v),
            Estimate::Degenerate => None,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, Estimate::Degenerate)
    }
}

/// Running sums of the barycenter `sum alpha_n f(x_n) / sum alpha_n`.
///
/// The numerator is stored relative to the first accumulated value `v_0`:
/// `sum alpha_n (v_n - v_0)`. A constant integrand then contributes exact
/// zeros and the estimate `v_0 + shifted / denominator` returns the constant
/// bit for bit.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MeanAccumulator {
    reference: Complex64,
    shifted: ComplexSum,
    denominator: ComplexSum,
    abs_weight_sum: NeumaierSum,
    count: u64,
}

impl MeanAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds the term `alpha * v`.
    pub fn accumulate(&mut self, alpha: Complex64, v: Complex64) -> Result<()> {
        if !alpha.is_finite() || !v.is_finite() {
            return Err(Error::NonFiniteInput { weight: alpha.to_string(), value: v.to_string() });
        }
        if self.count == 0 {
            self.reference = v;
        }
        self.shifted += alpha * (v - self.reference);
        self.denominator += alpha;
        self.abs_weight_sum += alpha.norm();
        self.count += 1;
        Ok(())
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// `sum alpha_n f(x_n)`.
    pub fn numerator(&self) -> Complex64 {
        self.shifted.value() + self.reference * self.denominator.value()
    }

    /// `sum alpha_n`, the empirical partition function.
    pub fn denominator(&self) -> Complex64 {
        self.denominator.value()
    }

    pub fn abs_weight_sum(&self) -> f64 {
        self.abs_weight_sum.value()
    }

    pub fn numerator_compensation(&self) -> Complex64 {
        self.shifted.compensation()
    }

    pub fn denominator_compensation(&self) -> Complex64 {
        self.denominator.compensation()
    }

    /// `|sum alpha| / sum |alpha|`, in `[0, 1]`; 0 when every weight vanished.
    pub fn denominator_ratio(&self) -> f64 {
        let total = self.abs_weight_sum();
        if total > 0.0 {
            (self.denominator().norm() / total).min(1.0)
        } else {
            0.0
        }
    }

    /// The partial barycenter, or `Degenerate` when
    /// `|sum alpha| < threshold * sum |alpha|`.
    pub fn estimate(&self, threshold: f64) -> Result<Estimate> {
        if self.count == 0 {
            return Err(Error::EmptyAccumulator);
        }
        let den = self.denominator();
        let total = self.abs_weight_sum();
        if total == 0.0 || den.norm() < threshold * total {
            return Ok(Estimate::Degenerate);
        }
        let value = self.reference + self.shifted.value() / den;
        if !value.is_finite() {
            return Ok(Estimate::Degenerate);
        }
        Ok(Estimate::Value(value))
    }

    /// Combines the sums of two disjoint index blocks.
    pub fn merge(&self, other: &Self) -> Self {
        if other.count == 0 {
            return self.clone();
        }
        if self.count == 0 {
            return other.clone();
        }
        let mut out = self.clone();
        out.shifted.merge(&other.shifted);
        let rebase = (other.reference - self.reference) * other.denominator.value();
        out.shifted += rebase;
        out.denominator.merge(&other.denominator);
        out.abs_weight_sum.merge(&other.abs_weight_sum);
        out.count += other.count;
        out
    }
}
