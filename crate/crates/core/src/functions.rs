//! Built-in real scalar functions of finitely many coordinates.
//!
//! They serve both as integrands (wrapped into cylinder functions) and as
//! payloads of weight policies (densities). Coordinate indices are 1-based in
//! constructors and labels, matching the usual `x_1, x_2, ...` notation.

use std::fmt;

use crate::error::{Error, Result};

pub trait RealFunction: Send + Sync + fmt::Debug {
    /// Number of leading coordinates read by `eval`.
    fn rank(&self) -> usize;

    /// Evaluates on a slice of at least `rank()` coordinates.
    fn eval(&self, x: &[f64]) -> f64;

    fn label(&self) -> String;
}

fn check_index(index: usize) -> Result<usize> {
    if index == 0 {
        return Err(Error::InvalidArgument("coordinate indices start at 1".into()));
    }
    Ok(index - 1)
}

#[derive(Debug, Clone)]
pub struct Constant(pub f64);

impl RealFunction for Constant {
    fn rank(&self) -> usize {
        0
    }
    fn eval(&self, _x: &[f64]) -> f64 {
        self.0
    }
    fn label(&self) -> String {
        format!("constant({})", self.0)
    }
}

/// `x_index`
#[derive(Debug, Clone)]
pub struct Coordinate {
    k: usize,
}

impl Coordinate {
    pub fn new(index: usize) -> Result<Self> {
        Ok(Self { k: check_index(index)? })
    }
}

impl RealFunction for Coordinate {
    fn rank(&self) -> usize {
        self.k + 1
    }
    fn eval(&self, x: &[f64]) -> f64 {
        x[self.k]
    }
    fn label(&self) -> String {
        format!("x{}", self.k + 1)
    }
}

/// `x_1 x_2 ... x_rank`
#[derive(Debug, Clone)]
pub struct CoordinateProduct {
    rank: usize,
}

impl CoordinateProduct {
    pub fn new(rank: usize) -> Result<Self> {
        if rank == 0 {
            return Err(Error::InvalidArgument("coordinate product needs rank >= 1".into()));
        }
        Ok(Self { rank })
    }
}

impl RealFunction for CoordinateProduct {
    fn rank(&self) -> usize {
        self.rank
    }
    fn eval(&self, x: &[f64]) -> f64 {
        x[..self.rank].iter().product()
    }
    fn label(&self) -> String {
        (1..=self.rank).map(|k| format!("x{k}")).collect::<Vec<_>>().join("*")
    }
}

/// Univariate polynomial `sum_j c_j x_index^j`.
#[derive(Debug, Clone)]
pub struct Polynomial {
    coefficients: Vec<f64>,
    k: usize,
}

impl Polynomial {
    pub fn new(coefficients: Vec<f64>, index: usize) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidArgument("polynomial needs coefficients".into()));
        }
        Ok(Self { coefficients, k: check_index(index)? })
    }
}

impl RealFunction for Polynomial {
    fn rank(&self) -> usize {
        self.k + 1
    }
    fn eval(&self, x: &[f64]) -> f64 {
        let t = x[self.k];
        self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }
    fn label(&self) -> String {
        format!("poly{:?}(x{})", self.coefficients, self.k + 1)
    }
}

/// `cos(frequency * x_index)`
#[derive(Debug, Clone)]
pub struct Cosine {
    frequency: f64,
    k: usize,
}

impl Cosine {
    pub fn new(frequency: f64, index: usize) -> Result<Self> {
        Ok(Self { frequency, k: check_index(index)? })
    }
}

impl RealFunction for Cosine {
    fn rank(&self) -> usize {
        self.k + 1
    }
    fn eval(&self, x: &[f64]) -> f64 {
        (self.frequency * x[self.k]).cos()
    }
    fn label(&self) -> String {
        format!("cos({}*x{})", self.frequency, self.k + 1)
    }
}

/// `exp(-|x|^2 / (2 width^2))` over the first `rank` coordinates.
#[derive(Debug, Clone)]
pub struct Gaussian {
    width: f64,
    rank: usize,
}

impl Gaussian {
    pub fn new(width: f64, rank: usize) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::NonpositiveWidth(width));
        }
        Ok(Self { width, rank })
    }
}

impl RealFunction for Gaussian {
    fn rank(&self) -> usize {
        self.rank
    }
    fn eval(&self, x: &[f64]) -> f64 {
        let sq: f64 = x[..self.rank].iter().map(|t| t * t).sum();
        (-sq / (2.0 * self.width * self.width)).exp()
    }
    fn label(&self) -> String {
        format!("gauss(width={}, rank={})", self.width, self.rank)
    }
}

/// `1/2 x^T A x + b^T x + c`, with `A` symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    matrix: Vec<Vec<f64>>,
    vector: Vec<f64>,
    constant: f64,
}

impl QuadraticForm {
    pub fn new(matrix: Vec<Vec<f64>>, vector: Vec<f64>, constant: f64) -> Result<Self> {
        let d = matrix.len().max(vector.len());
        let matrix = if matrix.is_empty() { vec![vec![0.0; d]; d] } else { matrix };
        let vector = if vector.is_empty() { vec![0.0; d] } else { vector };
        if matrix.len() != d || vector.len() != d || matrix.iter().any(|row| row.len() != d) {
            return Err(Error::InvalidArgument(format!(
                "quadratic form needs a square {d}x{d} matrix and a length-{d} vector"
            )));
        }
        let mut asym = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                asym = asym.max((matrix[i][j] - matrix[j][i]).abs());
            }
        }
        if asym != 0.0 {
            return Err(Error::AsymmetricMatrix(asym));
        }
        if matrix.iter().flatten().chain(&vector).chain([&constant]).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("quadratic form entries must be finite".into()));
        }
        Ok(Self { matrix, vector, constant })
    }

    pub fn dimension(&self) -> usize {
        self.vector.len()
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn vector(&self) -> &[f64] {
        &self.vector
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn with_constant(&self, constant: f64) -> Self {
        Self { constant, ..self.clone() }
    }
}

impl RealFunction for QuadraticForm {
    fn rank(&self) -> usize {
        self.vector.len()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        let d = self.vector.len();
        let mut quad = 0.0;
        for (i, row) in self.matrix.iter().enumerate() {
            let ax: f64 = row.iter().zip(&x[..d]).map(|(a, t)| a * t).sum();
            quad += x[i] * ax;
        }
        let lin: f64 = self.vector.iter().zip(&x[..d]).map(|(b, t)| b * t).sum();
        0.5 * quad + lin + self.constant
    }
    fn label(&self) -> String {
        format!("quadratic(d={})", self.vector.len())
    }
}
