//! Deterministic reference values: composite Gauss-Legendre tensor quadrature
//! up to rank 3, normalized expectations, and closed-form complex-Gaussian
//! moments. Nothing here shares code with the Dirac-mean path.

use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mean::{ComplexSum, NeumaierSum};

pub const DEFAULT_ORDER: usize = 10;
pub const DEFAULT_INITIAL_CELLS: usize = 4;
pub const REFINEMENT_TOL: f64 = 1e-10;
pub const NORMALIZATION_FLOOR: f64 = 1e-10;

/// Cell caps per axis at rank 1, 2, 3.
const CELL_CAPS: [usize; 3] = [4096, 512, 128];

/// Nodes and weights of the `order`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..order.div_ceil(2) {
        // Tricomi's initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(order, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(order, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(order: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=order {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if order == 0 {
        return (1.0, 0.0);
    }
    let d = order as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn default_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(DEFAULT_ORDER))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// One finite interval per axis; the rank is the number of intervals.
    pub domain: Vec<(f64, f64)>,
    pub initial_cells: usize,
    pub order: usize,
}

impl QuadratureSpec {
    pub fn new(domain: Vec<(f64, f64)>) -> Result<Self> {
        let spec = Self { domain, initial_cells: DEFAULT_INITIAL_CELLS, order: DEFAULT_ORDER };
        spec.validate()?;
        Ok(spec)
    }

    /// `[-L, L]^rank` with `L = 8 max(sigma, 1)`.
    pub fn symmetric(rank: usize, sigma: f64) -> Result<Self> {
        let l = 8.0 * sigma.max(1.0);
        Self::new(vec![(-l, l); rank])
    }

    pub fn rank(&self) -> usize {
        self.domain.len()
    }

    fn cap(&self) -> usize {
        CELL_CAPS[self.rank() - 1]
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.rank()) {
            return Err(Error::InvalidArgument(format!("quadrature rank {} not in 1..=3", self.rank())));
        }
        if self.initial_cells < 4 {
            return Err(Error::InvalidArgument("at least 4 cells per axis".into()));
        }
        if self.order == 0 {
            return Err(Error::InvalidArgument("quadrature order must be positive".into()));
        }
        for &(a, b) in &self.domain {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::InvalidArgument(format!("bad interval [{a}, {b}]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: Complex64,
    /// Integral of `|g|` at the same resolution.
    pub abs_value: f64,
    pub cells_used: usize,
}

/// Tensor product of per-axis composite rules with `cells` cells.
fn composite(spec: &QuadratureSpec, cells: usize, g: &(dyn Fn(&[f64]) -> Complex64 + Sync)) -> (Complex64, f64) {
    let owned;
    let (nodes, weights) = if spec.order == DEFAULT_ORDER {
        default_rule()
    } else {
        owned = gauss_legendre(spec.order);
        &owned
    };
    let axes: Vec<Vec<(f64, f64)>> = spec
        .domain
        .iter()
        .map(|&(a, b)| {
            let h = (b - a) / cells as f64;
            (0..cells)
                .flat_map(|c| {
                    let mid = a + (c as f64 + 0.5) * h;
                    nodes.iter().zip(weights).map(move |(t, w)| (mid + 0.5 * h * t, 0.5 * h * w))
                })
                .collect()
        })
        .collect();

    let partials: Vec<(ComplexSum, NeumaierSum)> = axes[0]
        .par_iter()
        .map(|&(x0, w0)| {
            let mut sum = ComplexSum::default();
            let mut abs = NeumaierSum::default();
            let mut point = vec![x0; axes.len()];
            let mut visit = |point: &[f64], w: f64| {
                let v = g(point);
                sum += v * w;
                abs += v.norm() * w;
            };
            match axes.len() {
                1 => visit(&point, w0),
                2 => {
                    for &(x1, w1) in &axes[1] {
                        point[1] = x1;
                        visit(&point, w0 * w1);
                    }
                }
                _ => {
                    for &(x1, w1) in &axes[1] {
                        point[1] = x1;
                        for &(x2, w2) in &axes[2] {
                            point[2] = x2;
                            visit(&point, w0 * w1 * w2);
                        }
                    }
                }
            }
            (sum, abs)
        })
        .collect();

    let mut total = ComplexSum::default();
    let mut abs_total = NeumaierSum::default();
    for (s, a) in &partials {
        total.merge(s);
        abs_total.merge(a);
    }
    (total.value(), abs_total.value())
}

/// Composite Gauss-Legendre quadrature with cell doubling until successive
/// results agree within `1e-10` relative to `int |g|`.
pub fn tensor_quadrature<G>(g: G, spec: &QuadratureSpec) -> Result<QuadratureResult>
where
    G: Fn(&[f64]) -> Complex64 + Sync,
{
    spec.validate()?;
    let mut cells = spec.initial_cells;
    let (mut prev, _) = composite(spec, cells, &g);
    let mut last_change = f64::INFINITY;
    loop {
        let next_cells = cells * 2;
        if next_cells > spec.cap() {
            return Err(Error::NoConvergence { cells, last_change });
        }
        let (value, abs_value) = composite(spec, next_cells, &g);
        let change = (value - prev).norm();
        if change <= REFINEMENT_TOL * abs_value.max(value.norm()) || change == 0.0 {
            return Ok(QuadratureResult { value, abs_value, cells_used: next_cells });
        }
        if !value.is_finite() {
            return Err(Error::NoConvergence { cells: next_cells, last_change: change });
        }
        prev = value;
        cells = next_cells;
        last_change = change;
    }
}

/// `int f rho / int rho` over the (truncated) domain of `spec`.
pub fn normalized_expectation<F, R>(f: F, density: R, spec: &QuadratureSpec) -> Result<QuadratureResult>
where
    F: Fn(&[f64]) -> Complex64 + Sync,
    R: Fn(&[f64]) -> Complex64 + Sync,
{
    let z = tensor_quadrature(&density, spec)?;
    if z.value.norm() < NORMALIZATION_FLOOR * z.abs_value {
        return Err(Error::DegenerateOracle { z_abs: z.value.norm(), total: z.abs_value });
    }
    let num = tensor_quadrature(|x: &[f64]| f(x) * density(x), spec)?;
    Ok(QuadratureResult {
        value: num.value / z.value,
        abs_value: num.abs_value / z.abs_value,
        cells_used: num.cells_used.max(z.cells_used),
    })
}

/// Normalized moments of `exp(-x^2/(2 sigma^2) - i a x^2 / 2)` on the real
/// line: 1 for moment 0, `sigma^2 / (1 + i a sigma^2)` for moment 2.
pub fn complex_gaussian_moment(a: f64, sigma: f64, moment: u32) -> Result<Complex64> {
    if !(sigma > 0.0) || !a.is_finite() {
        return Err(Error::InvalidArgument(format!("curvature {a}, width {sigma}")));
    }
    match moment {
        0 => Ok(Complex64::new(1.0, 0.0)),
        2 => {
            let s2 = sigma * sigma;
            Ok(Complex64::new(s2, 0.0) / Complex64::new(1.0, a * s2))
        }
        other => Err(Error::UnsupportedMoment(other)),
    }
}
