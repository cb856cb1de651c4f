//! Name-keyed strategy registries. Each entry turns a JSON parameter object
//! into a trait object, so experiments select sources, policies, functions,
//! quantile families and actions by name at runtime.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::Value;

use crate::action::{alternating_action, gaussian_regularizer, quadratic_action, ActionFunctional, Regularizer};
use crate::error::{Error, Result};
use crate::functions::{
    Constant, Coordinate, CoordinateProduct, Cosine, Gaussian, Polynomial, QuadraticForm, RealFunction,
};
use crate::seq::{
    constant_source, convergent_source, halton_source, pseudorandom_source, weyl_source, weyl_source_default,
    IndexSource, NormalQuantile, PointSource, Quantile, UniformQuantile,
};
use crate::weights::{
    boltzmann_policy, constant_policy, density_policy, oscillatory_policy, product_regularized_policy,
    WeightPolicy,
};

pub type Params = serde_json::Map<String, Value>;

type Constructor<T, A> = Box<dyn Fn(&A) -> Result<Arc<T>> + Send + Sync>;

pub struct Registry<T: ?Sized, A = Params> {
    what: &'static str,
    entries: BTreeMap<String, Constructor<T, A>>,
}

impl<T: ?Sized, A> Registry<T, A> {
    pub fn new(what: &'static str) -> Self {
        Self { what, entries: BTreeMap::new() }
    }

    pub fn register<F>(&mut self, name: &str, constructor: F) -> &mut Self
    where
        F: Fn(&A) -> Result<Arc<T>> + Send + Sync + 'static,
    {
        self.entries.insert(name.to_string(), Box::new(constructor));
        self
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }

    pub fn build(&self, name: &str, args: &A) -> Result<Arc<T>> {
        let ctor = self
            .entries
            .get(name)
            .ok_or_else(|| Error::UnknownName { kind: self.what, name: name.to_string() })?;
        ctor(args)
    }
}

fn bad_param(key: &str, expected: &str) -> Error {
    Error::InvalidArgument(format!("parameter {key:?}: expected {expected}"))
}

pub fn param_f64(params: &Params, key: &str, default: Option<f64>) -> Result<f64> {
    match params.get(key) {
        Some(v) => v.as_f64().ok_or_else(|| bad_param(key, "a number")),
        None => default.ok_or_else(|| bad_param(key, "a number (required)")),
    }
}

pub fn param_u64(params: &Params, key: &str, default: Option<u64>) -> Result<u64> {
    match params.get(key) {
        Some(v) => v.as_u64().ok_or_else(|| bad_param(key, "a nonnegative integer")),
        None => default.ok_or_else(|| bad_param(key, "a nonnegative integer (required)")),
    }
}

pub fn param_usize(params: &Params, key: &str, default: Option<usize>) -> Result<usize> {
    param_u64(params, key, default.map(|d| d as u64)).map(|v| v as usize)
}

/// A list of numbers; a bare number is read as a one-element list.
pub fn param_vec(params: &Params, key: &str, default: Option<Vec<f64>>) -> Result<Vec<f64>> {
    match params.get(key) {
        Some(Value::Array(items)) => items
            .iter()
            .map(|v| v.as_f64().ok_or_else(|| bad_param(key, "a list of numbers")))
            .collect(),
        Some(v) => v.as_f64().map(|x| vec![x]).ok_or_else(|| bad_param(key, "a list of numbers")),
        None => default.ok_or_else(|| bad_param(key, "a list of numbers (required)")),
    }
}

pub fn param_matrix(params: &Params, key: &str) -> Result<Vec<Vec<f64>>> {
    match params.get(key) {
        None => Ok(Vec::new()),
        Some(Value::Array(rows)) => rows
            .iter()
            .map(|row| {
                row.as_array()
                    .ok_or_else(|| bad_param(key, "a list of rows"))?
                    .iter()
                    .map(|v| v.as_f64().ok_or_else(|| bad_param(key, "numeric matrix entries")))
                    .collect()
            })
            .collect(),
        Some(_) => Err(bad_param(key, "a list of rows")),
    }
}

pub fn param_strings(params: &Params, key: &str) -> Result<Option<Vec<String>>> {
    match params.get(key) {
        None => Ok(None),
        Some(Value::Array(items)) => items
            .iter()
            .map(|v| v.as_str().map(str::to_string).ok_or_else(|| bad_param(key, "a list of strings")))
            .collect::<Result<Vec<_>>>()
            .map(Some),
        Some(_) => Err(bad_param(key, "a list of strings")),
    }
}

pub fn source_registry() -> Registry<dyn PointSource> {
    let mut r: Registry<dyn PointSource> = Registry::new("source");
    r.register("halton", |p| Ok(Arc::new(halton_source(param_u64(p, "offset", Some(0))?))));
    r.register("weyl", |p| {
        let offset = param_u64(p, "offset", Some(0))?;
        Ok(match param_strings(p, "alphas")? {
            Some(alphas) => Arc::new(weyl_source(&alphas, offset)?),
            None => Arc::new(weyl_source_default(offset)),
        })
    });
    r.register("pseudorandom", |p| Ok(Arc::new(pseudorandom_source(param_u64(p, "seed", Some(0))?))));
    r.register("convergent", |p| {
        Ok(Arc::new(convergent_source(
            param_vec(p, "target", Some(vec![0.0]))?,
            param_vec(p, "offset_point", Some(vec![1.0]))?,
            param_f64(p, "rate", Some(0.5))?,
        )?))
    });
    r.register("constant", |p| Ok(Arc::new(constant_source(param_f64(p, "value", Some(0.3))?)?)));
    r.register("index", |_| Ok(Arc::new(IndexSource)));
    r
}

pub fn quantile_registry() -> Registry<dyn Quantile> {
    let mut r: Registry<dyn Quantile> = Registry::new("quantile family");
    r.register("normal", |p| {
        Ok(Arc::new(NormalQuantile::new(param_f64(p, "mean", Some(0.0))?, param_f64(p, "sd", Some(1.0))?)?))
    });
    r.register("uniform", |p| {
        Ok(Arc::new(UniformQuantile::new(param_f64(p, "lo", Some(0.0))?, param_f64(p, "hi", Some(1.0))?)?))
    });
    r
}

pub fn function_registry() -> Registry<dyn RealFunction> {
    let mut r: Registry<dyn RealFunction> = Registry::new("function");
    r.register("constant", |p| Ok(Arc::new(Constant(param_f64(p, "value", Some(1.0))?))));
    r.register("coordinate", |p| Ok(Arc::new(Coordinate::new(param_usize(p, "index", Some(1))?)?)));
    r.register("coordinate-product", |p| {
        Ok(Arc::new(CoordinateProduct::new(param_usize(p, "rank", Some(2))?)?))
    });
    r.register("polynomial", |p| {
        Ok(Arc::new(Polynomial::new(
            param_vec(p, "coefficients", None)?,
            param_usize(p, "index", Some(1))?,
        )?))
    });
    r.register("cosine", |p| {
        Ok(Arc::new(Cosine::new(param_f64(p, "frequency", Some(1.0))?, param_usize(p, "index", Some(1))?)?))
    });
    r.register("gaussian", |p| {
        Ok(Arc::new(Gaussian::new(param_f64(p, "width", Some(1.0))?, param_usize(p, "rank", Some(1))?)?))
    });
    r.register("quadratic-form", |p| {
        Ok(Arc::new(QuadraticForm::new(
            param_matrix(p, "matrix")?,
            param_vec(p, "vector", Some(Vec::new()))?,
            param_f64(p, "constant", Some(0.0))?,
        )?))
    });
    r
}

pub fn action_registry() -> Registry<ActionFunctional> {
    let mut r: Registry<ActionFunctional> = Registry::new("action");
    r.register("quadratic", |p| {
        Ok(Arc::new(quadratic_action(
            param_matrix(p, "matrix")?,
            param_vec(p, "vector", Some(Vec::new()))?,
            param_f64(p, "constant", Some(0.0))?,
        )?))
    });
    r.register("alternating", |_| Ok(Arc::new(alternating_action())));
    r
}

pub fn regularizer_registry() -> Registry<Regularizer> {
    let mut r: Registry<Regularizer> = Registry::new("regularizer family");
    r.register("gaussian", |p| Ok(Arc::new(gaussian_regularizer(param_vec(p, "widths", Some(vec![1.0]))?)?)));
    r
}

/// Resolved payloads a policy constructor may need.
#[derive(Debug, Clone, Default)]
pub struct PolicyInputs {
    pub density: Option<Arc<dyn RealFunction>>,
    pub action: Option<Arc<ActionFunctional>>,
    pub regularizer: Option<Arc<Regularizer>>,
}

fn require<'a, T: ?Sized>(value: &'a Option<Arc<T>>, what: &str, policy: &str) -> Result<&'a Arc<T>> {
    value
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument(format!("policy {policy:?} needs a {what}")))
}

pub fn policy_registry() -> Registry<dyn WeightPolicy, PolicyInputs> {
    let mut r: Registry<dyn WeightPolicy, PolicyInputs> = Registry::new("policy");
    r.register("constant", |_| Ok(Arc::new(constant_policy())));
    r.register("density", |i| {
        let phi = require(&i.density, "density function", "density")?;
        Ok(Arc::new(density_policy(Arc::clone(phi), phi.rank())?))
    });
    r.register("boltzmann", |i| {
        Ok(Arc::new(boltzmann_policy((**require(&i.action, "action", "boltzmann")?).clone())))
    });
    r.register("oscillatory", |i| {
        Ok(Arc::new(oscillatory_policy((**require(&i.action, "action", "oscillatory")?).clone())))
    });
    r.register("fresnel", |i| {
        Ok(Arc::new(product_regularized_policy(
            (**require(&i.regularizer, "regularizer", "fresnel")?).clone(),
            (**require(&i.action, "action", "fresnel")?).clone(),
        )))
    });
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn params(v: Value) -> Params {
        v.as_object().cloned().unwrap()
    }

    #[test]
    fn builds_every_builtin_source() {
        let r = source_registry();
        assert_eq!(r.names(), vec!["constant", "convergent", "halton", "index", "pseudorandom", "weyl"]);
        let h = r.build("halton", &params(json!({"offset": 1}))).unwrap();
        assert_eq!(h.point_at(0, 1).unwrap().coords(), &[0.5]);
        let c = r.build("convergent", &params(json!({"rate": 0.5}))).unwrap();
        assert_eq!(c.point_at(3, 1).unwrap().coords(), &[0.125]);
        let w = r
            .build("weyl", &params(json!({"alphas": ["0.41421356237309504880"]})))
            .unwrap();
        assert_eq!(w.max_rank(), Some(1));
        assert!(matches!(
            r.build("sobol", &Params::new()),
            Err(Error::UnknownName { kind: "source", .. })
        ));
    }

    #[test]
    fn function_parameters_are_checked() {
        let r = function_registry();
        let f = r.build("polynomial", &params(json!({"coefficients": [1.0, 1.0]}))).unwrap();
        assert_eq!(f.eval(&[0.5]), 1.5);
        assert!(r.build("polynomial", &Params::new()).is_err());
        assert!(r.build("coordinate", &params(json!({"index": "two"}))).is_err());
        let q = r
            .build("quadratic-form", &params(json!({"matrix": [[2.0]], "constant": 1.0})))
            .unwrap();
        assert_eq!(q.eval(&[1.0]), 2.0);
    }

    #[test]
    fn policies_require_their_payloads() {
        let r = policy_registry();
        assert!(r.build("constant", &PolicyInputs::default()).is_ok());
        assert!(r.build("oscillatory", &PolicyInputs::default()).is_err());
        let inputs = PolicyInputs {
            action: Some(action_registry().build("alternating", &Params::new()).unwrap()),
            ..Default::default()
        };
        let p = r.build("oscillatory", &inputs).unwrap();
        assert!((p.weight(&[1.0]).unwrap().re + 1.0).abs() < 1e-15);
        assert!(matches!(r.build("frenel", &inputs), Err(Error::UnknownName { kind: "policy", .. })));
    }
}
