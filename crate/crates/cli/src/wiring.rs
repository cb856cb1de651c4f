//! Resolves the names in a config against the strategy registries and checks
//! the cross-field constraints.

use std::sync::Arc;

use dirac_core::action::{gaussian_regularizer, ActionFunctional, Regularizer};
use dirac_core::cylinder::{CylinderFunction, ProjectionHierarchy};
use dirac_core::mean::Parallelism;
use dirac_core::registry::{
    action_registry, function_registry, policy_registry, quantile_registry, regularizer_registry, source_registry,
    PolicyInputs,
};
use dirac_core::seq::{pullback_source, Codomain, PointSource, QuantileFamily};
use dirac_core::weights::WeightPolicy;
use dirac_core::Error;

use crate::config::{ExperimentConfig, Mode, StrategySpec, ValidationError};

/// Largest rank the quadrature oracle handles.
pub const MAX_ORACLE_RANK: usize = 3;

/// The runnable objects behind a validated config.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub source: Arc<dyn PointSource>,
    /// Quantile family when the source is a pullback, for the oracle density.
    pub family: Option<QuantileFamily>,
    pub policy: Arc<dyn WeightPolicy>,
    pub function: Option<CylinderFunction>,
    pub hierarchy: ProjectionHierarchy,
    /// `max(rank f, rank policy)`, at least 1.
    pub rank: usize,
    pub parallelism: Parallelism,
}

fn field_error(path: &str, err: Error) -> ValidationError {
    match err {
        Error::UnknownName { .. } => ValidationError::new(format!("{path}.kind"), err),
        other => ValidationError::new(path, other),
    }
}

fn build_action(spec: &StrategySpec, path: &str) -> Result<Arc<ActionFunctional>, ValidationError> {
    action_registry().build(&spec.kind, &spec.params).map_err(|e| field_error(path, e))
}

fn build_regularizer(spec: &StrategySpec, path: &str) -> Result<Arc<Regularizer>, ValidationError> {
    regularizer_registry().build(&spec.kind, &spec.params).map_err(|e| field_error(path, e))
}

impl Experiment {
    pub fn build(config: &ExperimentConfig) -> Result<Self, ValidationError> {
        config.stopping.validate().map_err(|e| ValidationError::new("stopping", e))?;
        if config.budget < config.stopping.min_samples {
            return Err(ValidationError::new(
                "budget",
                format!("budget {} is below stopping.min_samples {}", config.budget, config.stopping.min_samples),
            ));
        }
        if config.trace_stride == 0 {
            return Err(ValidationError::new("trace_stride", "must be at least 1"));
        }
        if config.blocks == 0 {
            return Err(ValidationError::new("blocks", "must be at least 1"));
        }

        let sources = source_registry();
        let base = sources
            .build(&config.source.kind, &config.source.params)
            .map_err(|e| field_error("source", e))?;
        let (source, family): (Arc<dyn PointSource>, _) = match &config.source.pullback {
            None => (base, None),
            Some(spec) => {
                let q = quantile_registry()
                    .build(&spec.kind, &spec.params)
                    .map_err(|e| field_error("source.pullback", e))?;
                let family = QuantileFamily::iid(q);
                let pulled = pullback_source(base, family.clone()).map_err(|e| field_error("source.pullback", e))?;
                (Arc::new(pulled), Some(family))
            }
        };

        let policy_spec = &config.policy;
        let mut inputs = PolicyInputs::default();
        if let Some(spec) = &policy_spec.density {
            inputs.density = Some(
                function_registry()
                    .build(&spec.kind, &spec.params)
                    .map_err(|e| field_error("policy.density", e))?,
            );
        }
        if let Some(spec) = &policy_spec.action {
            inputs.action = Some(build_action(spec, "policy.action")?);
        }
        if let Some(spec) = &policy_spec.regularizer {
            inputs.regularizer = Some(build_regularizer(spec, "policy.regularizer")?);
        }
        let policy = policy_registry()
            .build(&policy_spec.kind, &inputs)
            .map_err(|e| field_error("policy", e))?;

        let function = match &config.function {
            Some(spec) => {
                let f = function_registry()
                    .build(&spec.kind, &spec.params)
                    .map_err(|e| field_error("function", e))?;
                Some(CylinderFunction::from_real(f))
            }
            None if config.mode.needs_function() => {
                return Err(ValidationError::new("function", format!("required in {} mode", config.mode.as_str())));
            }
            None => None,
        };

        let rank = function
            .as_ref()
            .map_or(0, CylinderFunction::rank)
            .max(policy.rank())
            .max(1);
        let hierarchy = match &config.hierarchy {
            Some(h) => h.clone(),
            None => ProjectionHierarchy::new(vec![rank]).expect("rank >= 1"),
        };
        let needed = match config.mode {
            Mode::Certify => *hierarchy.ranks().last().expect("nonempty hierarchy"),
            Mode::FresnelScan => 1,
            _ => rank,
        };
        if let Some(max) = source.max_rank() {
            if max < needed {
                return Err(ValidationError::new(
                    "source",
                    format!("source provides {max} coordinates, the experiment reads {needed}"),
                ));
            }
        }

        match config.mode {
            Mode::Oracle | Mode::Compare => {
                if rank > MAX_ORACLE_RANK {
                    return Err(ValidationError::new(
                        "function",
                        format!("oracle rank {rank} exceeds {MAX_ORACLE_RANK}"),
                    ));
                }
                if source.codomain() == Codomain::RealLineProduct && family.is_none() {
                    return Err(ValidationError::new(
                        "source",
                        "the oracle needs a cube source or a pullback with a known density",
                    ));
                }
            }
            Mode::Certify | Mode::FresnelScan => {
                if config.source.pullback.is_some() || source.codomain() != Codomain::UnitCube {
                    return Err(ValidationError::new(
                        "source",
                        format!("{} mode needs a unit-cube source without pullback", config.mode.as_str()),
                    ));
                }
            }
            Mode::Estimate => {}
        }
        if config.mode == Mode::Certify && !(config.certify.level > 0.0 && config.certify.level < 1.0) {
            return Err(ValidationError::new("certify.level", "must lie in (0,1)"));
        }
        if config.mode == Mode::Compare && !(config.compare.tolerance >= 0.0) {
            return Err(ValidationError::new("compare.tolerance", "must be nonnegative"));
        }
        if config.mode == Mode::FresnelScan {
            let fr = &config.fresnel;
            if fr.curvature == 0.0 || !fr.curvature.is_finite() {
                return Err(ValidationError::new("fresnel.curvature", "must be finite and nonzero"));
            }
            if fr.sigmas.is_empty() || fr.sigmas.windows(2).any(|w| w[0] >= w[1]) {
                return Err(ValidationError::new("fresnel.sigmas", "must be nonempty and increasing"));
            }
            for &s in &fr.sigmas {
                gaussian_regularizer(vec![s]).map_err(|e| ValidationError::new("fresnel.sigmas", e))?;
            }
        }

        Ok(Self {
            source,
            family,
            policy,
            function,
            hierarchy,
            rank,
            parallelism: Parallelism::from_blocks(config.blocks),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn build(text: &str) -> Result<Experiment, ValidationError> {
        Experiment::build(&parse_config(text).unwrap())
    }

    #[test]
    fn misspelled_policy_names_the_field() {
        let err = build(
            "budget = 100000\n[source]\nkind = \"halton\"\n[policy]\nkind = \"frenel\"\n\
             [function]\nkind = \"coordinate\"\n",
        )
        .unwrap_err();
        assert_eq!(err.field, "policy.kind");
        assert!(err.message.contains("frenel"));
    }

    #[test]
    fn budget_below_min_samples() {
        let err = build("budget = 10\n[source]\nkind = \"halton\"\n[function]\nkind = \"coordinate\"\n").unwrap_err();
        assert_eq!(err.field, "budget");
    }

    #[test]
    fn nested_names_are_checked() {
        let err = build(
            "budget = 1000\n[source]\nkind = \"halton\"\noffset = 1\n[source.pullback]\nkind = \"cauchy\"\n\
             [function]\nkind = \"coordinate\"\n",
        )
        .unwrap_err();
        assert_eq!(err.field, "source.pullback.kind");
        let err = build(
            "budget = 1000\n[source]\nkind = \"halton\"\n[policy]\nkind = \"oscillatory\"\n\
             action = { kind = \"cubic\" }\n[function]\nkind = \"coordinate\"\n",
        )
        .unwrap_err();
        assert_eq!(err.field, "policy.action.kind");
    }

    #[test]
    fn ranks_must_fit_the_source() {
        let err = build(
            "budget = 1000\n[source]\nkind = \"weyl\"\nalphas = [\"0.41421356237309504880\"]\n\
             [function]\nkind = \"coordinate-product\"\nrank = 2\n",
        )
        .unwrap_err();
        assert_eq!(err.field, "source");
        let err = build(
            "mode = \"oracle\"\nbudget = 1000\n[source]\nkind = \"halton\"\n\
             [function]\nkind = \"coordinate-product\"\nrank = 4\n",
        )
        .unwrap_err();
        assert_eq!(err.field, "function");
    }

    #[test]
    fn function_required_outside_certify() {
        assert_eq!(build("budget = 1000\n[source]\nkind = \"halton\"\n").unwrap_err().field, "function");
        let e = build("mode = \"certify\"\nbudget = 1000\nhierarchy = [1, 2]\n[source]\nkind = \"halton\"\n").unwrap();
        assert_eq!(e.hierarchy.ranks(), &[1, 2]);
    }
}
