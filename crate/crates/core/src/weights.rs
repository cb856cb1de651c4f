//! Weight policies: the rule `x_n -> alpha_n` attached to each evaluation.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::action::{ActionFunctional, Regularizer};
use crate::error::{Error, Result};
use crate::functions::RealFunction;

/// `exp(-S)` overflows f64 just below `S = -709.78`; saturate earlier.
pub const BOLTZMANN_ACTION_FLOOR: f64 = -700.0;

pub trait WeightPolicy: Send + Sync + fmt::Debug {
    /// Registry name of the strategy.
    fn kind(&self) -> &'static str;

    /// Number of leading coordinates the payload reads.
    fn rank(&self) -> usize;

    /// Positive policies never produce cancelling weights.
    fn is_positive(&self) -> bool;

    fn weight(&self, x: &[f64]) -> Result<Complex64>;
}

impl<P: WeightPolicy + ?Sized> WeightPolicy for Arc<P> {
    fn kind(&self) -> &'static str {
        (**self).kind()
    }
    fn rank(&self) -> usize {
        (**self).rank()
    }
    fn is_positive(&self) -> bool {
        (**self).is_positive()
    }
    fn weight(&self, x: &[f64]) -> Result<Complex64> {
        (**self).weight(x)
    }
}

/// `alpha_n = 1`: classical Monte Carlo averaging.
#[derive(Debug, Clone, Default)]
pub struct ConstantPolicy;

pub fn constant_policy() -> ConstantPolicy {
    ConstantPolicy
}

impl WeightPolicy for ConstantPolicy {
    fn kind(&self) -> &'static str {
        "constant"
    }
    fn rank(&self) -> usize {
        0
    }
    fn is_positive(&self) -> bool {
        true
    }
    fn weight(&self, _x: &[f64]) -> Result<Complex64> {
        Ok(Complex64::new(1.0, 0.0))
    }
}

/// `alpha_n = phi(x_n)` for a nonnegative, possibly unbounded, density.
#[derive(Debug, Clone)]
pub struct DensityPolicy {
    density: Arc<dyn RealFunction>,
    rank: usize,
}

pub fn density_policy(density: Arc<dyn RealFunction>, rank: usize) -> Result<DensityPolicy> {
    if rank < density.rank() {
        return Err(Error::InvalidArgument(format!(
            "density {} reads {} coordinates, policy rank is {rank}",
            density.label(),
            density.rank()
        )));
    }
    Ok(DensityPolicy { density, rank })
}

impl WeightPolicy for DensityPolicy {
    fn kind(&self) -> &'static str {
        "density"
    }
    fn rank(&self) -> usize {
        self.rank
    }
    fn is_positive(&self) -> bool {
        true
    }
    fn weight(&self, x: &[f64]) -> Result<Complex64> {
        let value = self.density.eval(x);
        if value < 0.0 {
            return Err(Error::NegativeDensity { value });
        }
        Ok(Complex64::new(value, 0.0))
    }
}

/// `alpha_n = exp(-S(x_n))`, the Wick-rotated density.
#[derive(Debug, Clone)]
pub struct BoltzmannPolicy {
    action: ActionFunctional,
}

pub fn boltzmann_policy(action: ActionFunctional) -> BoltzmannPolicy {
    BoltzmannPolicy { action }
}

impl WeightPolicy for BoltzmannPolicy {
    fn kind(&self) -> &'static str {
        "boltzmann"
    }
    fn rank(&self) -> usize {
        self.action.rank()
    }
    fn is_positive(&self) -> bool {
        true
    }
    fn weight(&self, x: &[f64]) -> Result<Complex64> {
        let s = self.action.eval(x);
        if s < BOLTZMANN_ACTION_FLOOR {
            return Err(Error::WeightOverflow { action: s });
        }
        Ok(Complex64::new((-s).exp(), 0.0))
    }
}

/// `alpha_n = exp(-i S(x_n))`, unit modulus.
#[derive(Debug, Clone)]
pub struct OscillatoryPolicy {
    action: ActionFunctional,
}

pub fn oscillatory_policy(action: ActionFunctional) -> OscillatoryPolicy {
    OscillatoryPolicy { action }
}

impl WeightPolicy for OscillatoryPolicy {
    fn kind(&self) -> &'static str {
        "oscillatory"
    }
    fn rank(&self) -> usize {
        self.action.rank()
    }
    fn is_positive(&self) -> bool {
        false
    }
    fn weight(&self, x: &[f64]) -> Result<Complex64> {
        let (sin, cos) = self.action.eval(x).sin_cos();
        Ok(Complex64::new(cos, -sin))
    }
}

/// `alpha_n = xi(x_n) exp(-i S(x_n))`: the regularizer carried by the weights.
#[derive(Debug, Clone)]
pub struct ProductRegularizedPolicy {
    regularizer: Regularizer,
    action: ActionFunctional,
}

pub fn product_regularized_policy(regularizer: Regularizer, action: ActionFunctional) -> ProductRegularizedPolicy {
    ProductRegularizedPolicy { regularizer, action }
}

impl WeightPolicy for ProductRegularizedPolicy {
    fn kind(&self) -> &'static str {
        "fresnel"
    }
    fn rank(&self) -> usize {
        self.regularizer.rank().max(self.action.rank())
    }
    fn is_positive(&self) -> bool {
        false
    }
    fn weight(&self, x: &[f64]) -> Result<Complex64> {
        let xi = self.regularizer.value(x);
        if xi < 0.0 {
            return Err(Error::NegativeDensity { value: xi });
        }
        let (sin, cos) = self.action.eval(x).sin_cos();
        Ok(Complex64::new(xi * cos, -xi * sin))
    }
}

/// Multiplies every weight of `inner` by a fixed nonzero constant.
#[derive(Debug, Clone)]
pub struct ScaledPolicy<P> {
    inner: P,
    factor: Complex64,
}

pub fn scaled_policy<P: WeightPolicy>(inner: P, factor: Complex64) -> Result<ScaledPolicy<P>> {
    if factor == Complex64::new(0.0, 0.0) || !factor.is_finite() {
        return Err(Error::InvalidArgument(format!("gauge factor {factor} must be finite and nonzero")));
    }
    Ok(ScaledPolicy { inner, factor })
}

impl<P: WeightPolicy> WeightPolicy for ScaledPolicy<P> {
    fn kind(&self) -> &'static str {
        self.inner.kind()
    }
    fn rank(&self) -> usize {
        self.inner.rank()
    }
    fn is_positive(&self) -> bool {
        self.inner.is_positive() && self.factor.im == 0.0 && self.factor.re > 0.0
    }
    fn weight(&self, x: &[f64]) -> Result<Complex64> {
        Ok(self.inner.weight(x)? * self.factor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::{curvature_action, custom_action, gaussian_regularizer, quadratic_action};
    use crate::functions::Polynomial;
    use std::f64::consts::PI;

    #[test]
    fn constant_is_one() {
        assert_eq!(constant_policy().weight(&[0.3, 0.9]).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn density_weights_and_errors() {
        let phi = Arc::new(Polynomial::new(vec![1.0, 1.0], 1).unwrap());
        let p = density_policy(phi, 1).unwrap();
        assert_eq!(p.weight(&[0.5]).unwrap().re, 1.5);
        let neg = Arc::new(Polynomial::new(vec![-1.0], 1).unwrap());
        assert!(matches!(
            density_policy(neg, 1).unwrap().weight(&[0.2]),
            Err(Error::NegativeDensity { .. })
        ));
        let wide = Arc::new(Polynomial::new(vec![1.0], 3).unwrap());
        assert!(density_policy(wide, 2).is_err());
    }

    #[test]
    fn boltzmann_weights() {
        let zero = quadratic_action(vec![vec![0.0]], vec![0.0], 0.0).unwrap();
        assert_eq!(boltzmann_policy(zero).weight(&[5.0]).unwrap().re, 1.0);
        let huge = quadratic_action(vec![vec![0.0]], vec![0.0], 1e4).unwrap();
        assert_eq!(boltzmann_policy(huge).weight(&[0.0]).unwrap().re, 0.0);
        let negative = quadratic_action(vec![vec![0.0]], vec![0.0], -701.0).unwrap();
        assert!(matches!(
            boltzmann_policy(negative).weight(&[0.0]),
            Err(Error::WeightOverflow { .. })
        ));
    }

    #[test]
    fn oscillatory_weights() {
        let zero = quadratic_action(vec![vec![0.0]], vec![0.0], 0.0).unwrap();
        assert_eq!(oscillatory_policy(zero).weight(&[1.0]).unwrap(), Complex64::new(1.0, 0.0));
        let pi = quadratic_action(vec![vec![0.0]], vec![0.0], PI).unwrap();
        let w = oscillatory_policy(pi).weight(&[0.0]).unwrap();
        assert!((w - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn oscillatory_weights_have_unit_modulus() {
        for &s in &[0.0, 1e-3, 1.0, 12.5, 1e3, 7.77e5, 1e8, -1e8, -3.3] {
            let action = custom_action("const", 0, move |_| s);
            let w = oscillatory_policy(action).weight(&[]).unwrap();
            assert!((w.norm() - 1.0).abs() <= 1e-15, "S = {s}: |w| = {}", w.norm());
        }
    }

    #[test]
    fn product_regularized_identity_case() {
        let xi = gaussian_regularizer(vec![1e300]).unwrap();
        let zero = quadratic_action(vec![vec![0.0]], vec![0.0], 0.0).unwrap();
        let p = product_regularized_policy(xi, zero);
        assert_eq!(p.weight(&[0.7]).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn product_regularized_weight() {
        let xi = gaussian_regularizer(vec![1.0]).unwrap();
        let p = product_regularized_policy(xi, curvature_action(1.0).unwrap());
        let w = p.weight(&[1.0]).unwrap();
        let expected = Complex64::from_polar((-0.5f64).exp(), -0.5);
        assert!((w - expected).norm() < 1e-15);
    }

    #[test]
    fn scaled_policy_multiplies() {
        let c = Complex64::from_polar(2.0, PI / 3.0);
        let p = scaled_policy(constant_policy(), c).unwrap();
        assert_eq!(p.weight(&[]).unwrap(), c);
        assert!(!p.is_positive());
        assert!(scaled_policy(constant_policy(), Complex64::new(0.0, 0.0)).is_err());
    }
}
