use std::collections::VecDeque;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::accumulator::{Estimate, MeanAccumulator};
use crate::cylinder::CylinderFunction;
use crate::error::{Error, Result};
use crate::seq::PointSource;
use crate::weights::WeightPolicy;

pub const DEFAULT_WINDOW: usize = 8;
pub const DEFAULT_REL_TOL: f64 = 1e-4;
pub const DEFAULT_MIN_SAMPLES: u64 = 1_000;
pub const DEFAULT_DEGENERACY_THRESHOLD: f64 = 1e-8;
pub const DEFAULT_TRACE_STRIDE: u64 = 1_000;

/// Finite stand-in for the limit `m -> infinity`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StoppingRule {
    pub window: usize,
    pub rel_tol: f64,
    pub min_samples: u64,
    pub degeneracy_threshold: f64,
}

impl Default for StoppingRule {
    fn default() -> Self {
        Self {
            window: DEFAULT_WINDOW,
            rel_tol: DEFAULT_REL_TOL,
            min_samples: DEFAULT_MIN_SAMPLES,
            degeneracy_threshold: DEFAULT_DEGENERACY_THRESHOLD,
        }
    }
}

impl StoppingRule {
    /// The default rule that never stops before `budget` points.
    pub fn full_budget(budget: u64) -> Self {
        Self { min_samples: budget, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window < 2 {
            return Err(Error::InvalidArgument(format!("window {} < 2", self.window)));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::InvalidArgument(format!("rel_tol {} must be positive", self.rel_tol)));
        }
        if !(self.degeneracy_threshold > 0.0 && self.degeneracy_threshold < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "degeneracy threshold {} not in (0,1)",
                self.degeneracy_threshold
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    WindowCauchy,
    BudgetExhausted,
    Degenerate,
}

/// Snapshot of the partial sums after `m` accumulated terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub m: u64,
    pub numerator: Complex64,
    pub denominator: Complex64,
    /// `None` where the normalization is degenerate.
    pub estimate: Option<Complex64>,
    pub den_ratio: f64,
}

impl TraceRow {
    fn snapshot(acc: &MeanAccumulator, threshold: f64) -> Result<Self> {
        Ok(Self {
            m: acc.count(),
            numerator: acc.numerator(),
            denominator: acc.denominator(),
            estimate: acc.estimate(threshold)?.value(),
            den_ratio: acc.denominator_ratio(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub trace: Vec<TraceRow>,
    pub final_estimate: Estimate,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub n_used: u64,
}

/// How the index range is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    /// One streaming pass that stops as soon as the rule fires.
    #[default]
    Sequential,
    /// The budget split into this many contiguous blocks, accumulated
    /// concurrently and merged left to right. Reproducible for a fixed count.
    Blocks(usize),
}

impl Parallelism {
    pub fn from_blocks(blocks: usize) -> Self {
        if blocks <= 1 {
            Parallelism::Sequential
        } else {
            Parallelism::Blocks(blocks)
        }
    }
}

/// Watches trace rows and decides when to stop.
struct Monitor<'a> {
    rule: &'a StoppingRule,
    recent: VecDeque<Complex64>,
    degenerate_streak: usize,
}

impl<'a> Monitor<'a> {
    fn new(rule: &'a StoppingRule) -> Self {
        Self { rule, recent: VecDeque::with_capacity(rule.window), degenerate_streak: 0 }
    }

    fn observe(&mut self, row: &TraceRow, budget: u64) -> Option<StopReason> {
        match row.estimate {
            None => {
                self.recent.clear();
                self.degenerate_streak += 1;
                if self.degenerate_streak >= self.rule.window {
                    return Some(StopReason::Degenerate);
                }
            }
            Some(est) => {
                self.degenerate_streak = 0;
                if self.recent.len() == self.rule.window {
                    self.recent.pop_front();
                }
                self.recent.push_back(est);
                if row.m >= self.rule.min_samples && self.is_cauchy(est) {
                    return Some(StopReason::WindowCauchy);
                }
            }
        }
        if row.m >= budget {
            return Some(if row.estimate.is_none() {
                StopReason::Degenerate
            } else {
                StopReason::BudgetExhausted
            });
        }
        None
    }

    fn is_cauchy(&self, last: Complex64) -> bool {
        if self.recent.len() < self.rule.window {
            return false;
        }
        let tol = self.rule.rel_tol * (1.0 + last.norm());
        let values: Vec<Complex64> = self.recent.iter().copied().collect();
        values
            .iter()
            .enumerate()
            .all(|(i, a)| values[i + 1..].iter().all(|b| (a - b).norm() <= tol))
    }
}

fn is_trace_point(m: u64, stride: u64, budget: u64) -> bool {
    m % stride == 0 || m == budget
}

fn check_inputs(budget: u64, rule: &StoppingRule, trace_stride: u64) -> Result<()> {
    rule.validate()?;
    if budget == 0 {
        return Err(Error::InvalidArgument("budget must be positive".into()));
    }
    if budget < rule.min_samples {
        return Err(Error::InvalidArgument(format!(
            "budget {budget} below min_samples {}",
            rule.min_samples
        )));
    }
    if trace_stride == 0 {
        return Err(Error::InvalidArgument("trace stride must be positive".into()));
    }
    Ok(())
}

struct Evaluator<'a, S: ?Sized, P: ?Sized> {
    source: &'a S,
    policy: &'a P,
    f: &'a CylinderFunction,
    rank: usize,
}

impl<S: PointSource + ?Sized, P: WeightPolicy + ?Sized> Evaluator<'_, S, P> {
    fn term(&self, n: u64, point: &mut [f64]) -> Result<(Complex64, Complex64)> {
        self.source.fill(n, point)?;
        let alpha = self.policy.weight(point)?;
        let value = self.f.eval(point)?;
        Ok((alpha, value))
    }
}

/// Iterates `n = 0, 1, ...` accumulating `alpha_n f(x_n)`, records a trace
/// row every `trace_stride` terms (and at the budget), and stops on the
/// window-Cauchy criterion, on persistent degeneracy, or at the budget.
pub fn run<S, P>(
    source: &S,
    policy: &P,
    f: &CylinderFunction,
    budget: u64,
    rule: &StoppingRule,
    trace_stride: u64,
    parallelism: Parallelism,
) -> Result<ConvergenceReport>
where
    S: PointSource + ?Sized,
    P: WeightPolicy + ?Sized,
{
    check_inputs(budget, rule, trace_stride)?;
    let eval = Evaluator { source, policy, f, rank: f.rank().max(policy.rank()) };
    match parallelism {
        Parallelism::Sequential | Parallelism::Blocks(0 | 1) => {
            run_sequential(&eval, budget, rule, trace_stride)
        }
        Parallelism::Blocks(blocks) => run_blocks(&eval, budget, rule, trace_stride, blocks),
    }
}

fn run_sequential<S, P>(
    eval: &Evaluator<'_, S, P>,
    budget: u64,
    rule: &StoppingRule,
    stride: u64,
) -> Result<ConvergenceReport>
where
    S: PointSource + ?Sized,
    P: WeightPolicy + ?Sized,
{
    let mut acc = MeanAccumulator::new();
    let mut point = vec![0.0; eval.rank];
    let mut trace = Vec::new();
    let mut monitor = Monitor::new(rule);
    for n in 0..budget {
        let (alpha, value) = eval.term(n, &mut point)?;
        acc.accumulate(alpha, value)?;
        let m = n + 1;
        if is_trace_point(m, stride, budget) {
            let row = TraceRow::snapshot(&acc, rule.degeneracy_threshold)?;
            let stop = monitor.observe(&row, budget);
            trace.push(row);
            if let Some(reason) = stop {
                return finish(trace, &acc, rule, reason);
            }
        }
    }
    unreachable!("the budget is always a trace point")
}

fn finish(
    trace: Vec<TraceRow>,
    acc: &MeanAccumulator,
    rule: &StoppingRule,
    reason: StopReason,
) -> Result<ConvergenceReport> {
    Ok(ConvergenceReport {
        trace,
        final_estimate: acc.estimate(rule.degeneracy_threshold)?,
        converged: reason == StopReason::WindowCauchy,
        stop_reason: reason,
        n_used: acc.count(),
    })
}

/// Per-block result: local partial sums at every global trace point inside
/// the block, the block total, and the first error (with its global index).
struct BlockResult {
    snapshots: Vec<MeanAccumulator>,
    total: MeanAccumulator,
    error: Option<(u64, Error)>,
}

fn run_blocks<S, P>(
    eval: &Evaluator<'_, S, P>,
    budget: u64,
    rule: &StoppingRule,
    stride: u64,
    blocks: usize,
) -> Result<ConvergenceReport>
where
    S: PointSource + ?Sized,
    P: WeightPolicy + ?Sized,
{
    let block_len = budget.div_ceil(blocks as u64);
    let ranges: Vec<(u64, u64)> = (0..blocks as u64)
        .map(|b| (b * block_len, ((b + 1) * block_len).min(budget)))
        .filter(|(lo, hi)| lo < hi)
        .collect();

    let results: Vec<BlockResult> = ranges
        .par_iter()
        .map(|&(lo, hi)| {
            let mut acc = MeanAccumulator::new();
            let mut point = vec![0.0; eval.rank];
            let mut snapshots = Vec::new();
            for n in lo..hi {
                let outcome = eval
                    .term(n, &mut point)
                    .and_then(|(alpha, value)| acc.accumulate(alpha, value));
                if let Err(e) = outcome {
                    return BlockResult { snapshots, total: acc, error: Some((n, e)) };
                }
                if is_trace_point(n + 1, stride, budget) {
                    snapshots.push(acc.clone());
                }
            }
            BlockResult { snapshots, total: acc, error: None }
        })
        .collect();

    let mut prefix = MeanAccumulator::new();
    let mut trace = Vec::new();
    let mut monitor = Monitor::new(rule);
    for block in results {
        for local in &block.snapshots {
            let combined = prefix.merge(local);
            let row = TraceRow::snapshot(&combined, rule.degeneracy_threshold)?;
            let stop = monitor.observe(&row, budget);
            trace.push(row);
            if let Some(reason) = stop {
                return finish(trace, &combined, rule, reason);
            }
        }
        if let Some((_, e)) = block.error {
            return Err(e);
        }
        prefix = prefix.merge(&block.total);
    }
    unreachable!("the budget is always a trace point")
}
