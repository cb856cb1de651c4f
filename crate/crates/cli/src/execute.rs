//! Runs a validated experiment and writes its CSV trace and JSON summary.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use dirac_core::cylinder::{hierarchy_certify, integrate_cylinder, CylinderFunction};
use dirac_core::mean::{ConvergenceReport, Estimate, StopReason};
use dirac_core::oracle::{normalized_expectation, QuadratureResult, QuadratureSpec};
use dirac_core::action::{fresnel_limit_scan, ScanPoint};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::{ExperimentConfig, Mode, ValidationError};
use crate::wiring::Experiment;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Success,
    Degenerate,
    NotConverged,
    Failed,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::Degenerate => 2,
            Outcome::NotConverged => 3,
            Outcome::Failed => 4,
        }
    }
}

/// Everything that ends a run with exit code 1.
#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Core(#[from] dirac_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub outcome: Outcome,
    pub summary: Value,
    pub trace_path: Option<PathBuf>,
    pub summary_path: PathBuf,
}

/// Finite complex as `{"re", "im"}`; anything else becomes `null`.
fn complex_json(z: Option<Complex64>) -> Value {
    match z {
        Some(z) if z.is_finite() => json!({ "re": z.re, "im": z.im }),
        _ => Value::Null,
    }
}

fn real_json(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:?}")
    } else {
        String::new()
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> RunError + '_ {
    move |source| RunError::Io { path: path.to_path_buf(), source }
}

pub const TRACE_HEADER: [&str; 8] = ["m", "re_num", "im_num", "re_den", "im_den", "re_est", "im_est", "den_ratio"];

/// Trace rows as CSV. Degenerate rows leave the estimate columns empty.
pub fn write_trace(path: &Path, report: &ConvergenceReport) -> Result<(), RunError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TRACE_HEADER)?;
    for row in &report.trace {
        let (re_est, im_est) = match row.estimate {
            Some(z) => (num(z.re), num(z.im)),
            None => (String::new(), String::new()),
        };
        w.write_record([
            row.m.to_string(),
            num(row.numerator.re),
            num(row.numerator.im),
            num(row.denominator.re),
            num(row.denominator.im),
            re_est,
            im_est,
            num(row.den_ratio),
        ])?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

fn report_json(report: &ConvergenceReport) -> Value {
    json!({
        "final_estimate": complex_json(report.final_estimate.value()),
        "degenerate": report.final_estimate.is_degenerate(),
        "converged": report.converged,
        "stop_reason": report.stop_reason,
        "n_used": report.n_used,
        "den_ratio": report.trace.last().map_or(Value::Null, |r| real_json(r.den_ratio)),
        "trace_rows": report.trace.len(),
    })
}

fn report_outcome(report: &ConvergenceReport) -> Outcome {
    if report.final_estimate.is_degenerate() || report.stop_reason == StopReason::Degenerate {
        Outcome::Degenerate
    } else if !report.converged {
        Outcome::NotConverged
    } else {
        Outcome::Success
    }
}

fn run_estimate(config: &ExperimentConfig, exp: &Experiment) -> Result<ConvergenceReport, RunError> {
    let f = exp.function.as_ref().expect("validated: function present");
    Ok(integrate_cylinder(
        f,
        &exp.source,
        exp.policy.as_ref(),
        config.budget,
        &config.stopping,
        config.trace_stride,
        exp.parallelism,
    )?)
}

/// Quadrature of `f` against (pullback density) x (weight) over the
/// effective support of the evaluation points.
pub fn oracle_value(exp: &Experiment) -> Result<(QuadratureResult, Vec<(f64, f64)>), RunError> {
    let f: &CylinderFunction = exp.function.as_ref().expect("validated: function present");
    let domain: Vec<(f64, f64)> = (0..exp.rank)
        .map(|k| exp.family.as_ref().map_or((0.0, 1.0), |fam| fam.factor(k).effective_support()))
        .collect();
    let spec = QuadratureSpec::new(domain.clone())?;
    let failure: OnceLock<dirac_core::Error> = OnceLock::new();
    let density = |x: &[f64]| -> Complex64 {
        let pdf = exp.family.as_ref().map_or(1.0, |fam| fam.pdf(x));
        match exp.policy.weight(x) {
            Ok(w) => w * pdf,
            Err(e) => {
                let _ = failure.set(e);
                Complex64::new(0.0, 0.0)
            }
        }
    };
    let value = |x: &[f64]| -> Complex64 {
        f.eval(x).unwrap_or_else(|e| {
            let _ = failure.set(e);
            Complex64::new(0.0, 0.0)
        })
    };
    let result = normalized_expectation(value, density, &spec);
    if let Some(e) = failure.into_inner() {
        return Err(e.into());
    }
    Ok((result?, domain))
}

fn oracle_json(q: &QuadratureResult, domain: &[(f64, f64)]) -> Value {
    json!({
        "value": complex_json(Some(q.value)),
        "abs_value": real_json(q.abs_value),
        "cells_used": q.cells_used,
        "domain": domain,
    })
}

fn write_scan(path: &Path, points: &[ScanPoint], curvature: f64) -> Result<(), RunError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["sigma", "re_est", "im_est", "re_closed", "im_closed", "distance_to_limit"])?;
    for p in points {
        let (re, im) = match p.estimate.value() {
            Some(z) => (num(z.re), num(z.im)),
            None => (String::new(), String::new()),
        };
        w.write_record([
            num(p.sigma),
            re,
            im,
            num(p.closed_form.re),
            num(p.closed_form.im),
            p.distance_to_limit(curvature).map_or(String::new(), num),
        ])?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

fn write_certify(path: &Path, report: &dirac_core::cylinder::HierarchyReport) -> Result<(), RunError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["rank", "bins_per_axis", "sample_count", "statistic", "threshold", "level", "pass"])?;
    for r in &report.reports {
        w.write_record([
            r.rank.to_string(),
            r.bins_per_axis.to_string(),
            r.sample_count.to_string(),
            num(r.statistic),
            num(r.threshold),
            num(r.level),
            r.pass.to_string(),
        ])?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

/// Validates `config`, runs its mode and writes the outputs under `out_dir`.
pub fn execute(config: &ExperimentConfig, out_dir: &Path) -> Result<RunSummary, RunError> {
    let exp = Experiment::build(config)?;
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let trace_path = out_dir.join(&config.output.trace);
    let summary_path = out_dir.join(&config.output.summary);

    let (outcome, result, wrote_trace) = match config.mode {
        Mode::Estimate => {
            let report = run_estimate(config, &exp)?;
            write_trace(&trace_path, &report)?;
            (report_outcome(&report), report_json(&report), true)
        }
        Mode::Oracle => {
            let (q, domain) = oracle_value(&exp)?;
            (Outcome::Success, oracle_json(&q, &domain), false)
        }
        Mode::Compare => {
            let (q, domain) = oracle_value(&exp)?;
            let report = run_estimate(config, &exp)?;
            write_trace(&trace_path, &report)?;
            let difference = report.final_estimate.value().map(|z| (z - q.value).norm());
            let pass = difference.is_some_and(|d| d <= config.compare.tolerance);
            let outcome = match report_outcome(&report) {
                Outcome::Success if !pass => Outcome::Failed,
                other => other,
            };
            let result = json!({
                "estimate": report_json(&report),
                "oracle": oracle_json(&q, &domain),
                "difference": difference.map_or(Value::Null, real_json),
                "tolerance": config.compare.tolerance,
                "pass": pass,
            });
            (outcome, result, true)
        }
        Mode::Certify => {
            let n = config.certify.samples.unwrap_or(config.budget);
            let report = hierarchy_certify(&exp.source, &exp.hierarchy, n, config.certify.bins, config.certify.level)?;
            write_certify(&trace_path, &report)?;
            let outcome = if report.pass { Outcome::Success } else { Outcome::Failed };
            (outcome, serde_json::to_value(&report).expect("report serializes"), true)
        }
        Mode::FresnelScan => {
            let fr = &config.fresnel;
            let points = fresnel_limit_scan(
                exp.source.clone(),
                fr.curvature,
                &fr.sigmas,
                fr.route,
                config.budget,
                &config.stopping,
                config.trace_stride,
                exp.parallelism,
            )?;
            write_scan(&trace_path, &points, fr.curvature)?;
            let distances: Vec<Option<f64>> = points.iter().map(|p| p.distance_to_limit(fr.curvature)).collect();
            let nonincreasing = distances.windows(2).all(|w| matches!(w, [Some(a), Some(b)] if b <= a));
            let outcome = if points.iter().any(|p| matches!(p.estimate, Estimate::Degenerate)) {
                Outcome::Degenerate
            } else if points.iter().any(|p| !p.converged) {
                Outcome::NotConverged
            } else {
                Outcome::Success
            };
            let rows: Vec<Value> = points
                .iter()
                .zip(&distances)
                .map(|(p, d)| {
                    json!({
                        "sigma": p.sigma,
                        "estimate": complex_json(p.estimate.value()),
                        "closed_form": complex_json(Some(p.closed_form)),
                        "distance_to_limit": d.map_or(Value::Null, real_json),
                        "converged": p.converged,
                        "n_used": p.n_used,
                    })
                })
                .collect();
            let result = json!({
                "curvature": fr.curvature,
                "route": fr.route,
                "points": rows,
                "distance_nonincreasing": nonincreasing,
            });
            (outcome, result, true)
        }
    };

    let summary = json!({
        "mode": config.mode,
        "outcome": outcome,
        "exit_code": outcome.exit_code(),
        "result": result,
        "settings": config,
    });
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    fs::write(&summary_path, text + "\n").map_err(io_err(&summary_path))?;
    Ok(RunSummary { outcome, summary, trace_path: wrote_trace.then_some(trace_path), summary_path })
}
