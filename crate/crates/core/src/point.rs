//! Points of the ambient spaces: dense vectors, packed symmetric matrices and
//! grid functions on `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointKind {
    DenseVector,
    /// `dim x dim` symmetric matrix stored as the packed upper triangle, row by row.
    SymMatrix,
    /// Samples at `t_j = j / dim` for `j = 0..=dim`.
    GridFunction,
}

/// An element of a cone's ambient space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPoint")]
pub struct Point {
    kind: PointKind,
    dim: usize,
    data: Vec<f64>,
}

#[derive(Deserialize)]
struct RawPoint {
    kind: PointKind,
    dim: usize,
    data: Vec<f64>,
}

impl TryFrom<RawPoint> for Point {
    type Error = crate::ConeError;

    fn try_from(raw: RawPoint) -> Result<Self> {
        Point::new(raw.kind, raw.dim, raw.data)
    }
}

pub(crate) fn packed_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Index of entry `(i, j)` with `i <= j` in the packed upper triangle.
pub(crate) fn packed_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

fn expected_len(kind: PointKind, dim: usize) -> usize {
    match kind {
        PointKind::DenseVector => dim,
        PointKind::SymMatrix => packed_len(dim),
        PointKind::GridFunction => dim + 1,
    }
}

impl Point {
    pub fn new(kind: PointKind, dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != expected_len(kind, dim) {
            return input(format!(
                "{kind:?} of dim {dim} needs {} entries, got {}",
                expected_len(kind, dim),
                data.len()
            ));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return input("point has non-finite entries");
        }
        Ok(Point { kind, dim, data })
    }

    pub fn vector(data: Vec<f64>) -> Self {
        let dim = data.len();
        Point { kind: PointKind::DenseVector, dim, data }
    }

    /// Packed symmetric matrix of order `n`.
    pub fn sym_packed(n: usize, packed: Vec<f64>) -> Self {
        assert_eq!(packed.len(), packed_len(n), "packed length mismatch");
        Point { kind: PointKind::SymMatrix, dim: n, data: packed }
    }

    /// Symmetric matrix from a row-major dense `n x n` array; the upper triangle is kept.
    pub fn sym_from_dense(n: usize, dense: &[f64]) -> Self {
        assert_eq!(dense.len(), n * n);
        let mut packed = Vec::with_capacity(packed_len(n));
        for i in 0..n {
            for j in i..n {
                packed.push(0.5 * (dense[i * n + j] + dense[j * n + i]));
            }
        }
        Point::sym_packed(n, packed)
    }

    pub fn sym_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut dense = vec![0.0; n * n];
        for (i, d) in diag.iter().enumerate() {
            dense[i * n + i] = *d;
        }
        Point::sym_from_dense(n, &dense)
    }

    pub fn identity(n: usize) -> Self {
        Point::sym_diag(&vec![1.0; n])
    }

    /// Grid function from its `n + 1` samples.
    pub fn grid(samples: Vec<f64>) -> Self {
        assert!(samples.len() >= 2, "grid needs at least two samples");
        let dim = samples.len() - 1;
        Point { kind: PointKind::GridFunction, dim, data: samples }
    }

    /// Samples `g(t_j)` on the uniform grid with `n` intervals.
    pub fn grid_from_fn(n: usize, g: impl Fn(f64) -> f64) -> Self {
        Point::grid((0..=n).map(|j| g(j as f64 / n as f64)).collect())
    }

    pub fn kind(&self) -> PointKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn zeros_like(&self) -> Self {
        Point { kind: self.kind, dim: self.dim, data: vec![0.0; self.data.len()] }
    }

    pub fn same_space(&self, other: &Point) -> bool {
        self.kind == other.kind && self.dim == other.dim
    }

    pub(crate) fn check_same_space(&self, other: &Point) -> Result<()> {
        if self.same_space(other) {
            Ok(())
        } else {
            input(format!(
                "points live in different spaces: {:?}({}) vs {:?}({})",
                self.kind, self.dim, other.kind, other.dim
            ))
        }
    }

    pub fn with_data(&self, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), self.data.len());
        Point { kind: self.kind, dim: self.dim, data }
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.with_data(self.data.iter().map(|v| a * v).collect())
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &Point) -> Self {
        debug_assert!(self.same_space(other));
        self.with_data(self.data.iter().zip(&other.data).map(|(x, y)| x + a * y).collect())
    }

    pub fn add(&self, other: &Point) -> Self {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Point) -> Self {
        self.axpy(-1.0, other)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| *v == 0.0)
    }

    /// Euclidean for vectors, Frobenius for symmetric matrices, sup-norm for grid functions.
    pub fn norm(&self) -> f64 {
        match self.kind {
            PointKind::DenseVector => euclid(&self.data),
            PointKind::SymMatrix => {
                let n = self.dim;
                let mut acc = 0.0;
                let mut k = 0;
                for i in 0..n {
                    for j in i..n {
                        let v = self.data[k];
                        acc += if i == j { v * v } else { 2.0 * v * v };
                        k += 1;
                    }
                }
                acc.sqrt()
            }
            PointKind::GridFunction => self.data.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        self.sub(other).norm()
    }

    /// Unit-norm copy, or `None` for the zero point.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        (n > 0.0).then(|| self.scaled(1.0 / n))
    }

    /// Row-major dense copy of a symmetric matrix.
    pub fn to_dense(&self) -> Vec<f64> {
        assert_eq!(self.kind, PointKind::SymMatrix);
        let n = self.dim;
        let mut dense = vec![0.0; n * n];
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                dense[i * n + j] = self.data[k];
                dense[j * n + i] = self.data[k];
                k += 1;
            }
        }
        dense
    }

    /// Entry `(i, j)` of a symmetric matrix.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        assert_eq!(self.kind, PointKind::SymMatrix);
        self.data[packed_index(self.dim, i, j)]
    }
}

pub(crate) fn euclid(v: &[f64]) -> f64 {
    // scaled to avoid overflow on large iterates
    let m = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    m * v.iter().map(|x| (x / m) * (x / m)).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
