//! Small dense linear algebra: cyclic Jacobi eigendecomposition of symmetric
//! matrices, the PSD square root, and Gram-Schmidt helpers used by the
//! polyhedral code.

use crate::error::{ConeError, Result};
use crate::point::{Point, PointKind};

/// Eigendecomposition `A = V diag(values) V^T`; `values` ascending, `vectors`
/// row-major with eigenvectors in columns.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub n: usize,
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
}

impl SymEigen {
    pub fn column(&self, k: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.vectors[i * self.n + k]).collect()
    }

    /// `V diag(g(values)) V^T` as a dense row-major matrix.
    pub fn reassemble(&self, g: impl Fn(f64) -> f64) -> Vec<f64> {
        let n = self.n;
        let w: Vec<f64> = self.values.iter().map(|v| g(*v)).collect();
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += self.vectors[i * n + k] * w[k] * self.vectors[j * n + k];
                }
                out[i * n + j] = acc;
                out[j * n + i] = acc;
            }
        }
        out
    }
}

const MAX_SWEEPS: usize = 64;

/// Cyclic Jacobi rotations on a dense symmetric matrix.
pub fn sym_eigen(dense: &[f64], n: usize) -> SymEigen {
    assert_eq!(dense.len(), n * n);
    let mut a = dense.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let total: f64 = a.iter().map(|x| x * x).sum();
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off <= 1e-34 * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                a[p * n + p] -= t * apq;
                a[q * n + q] += t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for r in 0..n {
                    if r != p && r != q {
                        let g = a[r * n + p];
                        let h = a[r * n + q];
                        let rp = g - s * (h + g * tau);
                        let rq = h + s * (g - h * tau);
                        a[r * n + p] = rp;
                        a[p * n + r] = rp;
                        a[r * n + q] = rq;
                        a[q * n + r] = rq;
                    }
                    let g = v[r * n + p];
                    let h = v[r * n + q];
                    v[r * n + p] = g - s * (h + g * tau);
                    v[r * n + q] = h + s * (g - h * tau);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&k| a[k * n + k]).collect();
    let mut vectors = vec![0.0; n * n];
    for (col, &k) in order.iter().enumerate() {
        for i in 0..n {
            vectors[i * n + col] = v[i * n + k];
        }
    }
    SymEigen { n, values, vectors }
}

pub fn sym_eigen_point(m: &Point) -> SymEigen {
    assert_eq!(m.kind(), PointKind::SymMatrix);
    sym_eigen(&m.to_dense(), m.dim())
}

pub fn min_eigenvalue(m: &Point) -> f64 {
    sym_eigen_point(m).values.first().copied().unwrap_or(0.0)
}

/// Principal square root of a PSD matrix. Eigenvalues within
/// `tol * max(1, |M|_F)` of zero are clamped to zero; anything more negative
/// is a domain error.
pub fn sym_sqrt(m: &Point, tol: f64) -> Result<Point> {
    if m.kind() != PointKind::SymMatrix {
        return Err(ConeError::Input("sym_sqrt needs a symmetric matrix".into()));
    }
    let eig = sym_eigen_point(m);
    let thresh = tol * m.norm().max(1.0);
    if let Some(&lo) = eig.values.first() {
        if lo < -thresh {
            return Err(ConeError::Domain(format!("matrix is not PSD: smallest eigenvalue {lo:e}")));
        }
    }
    let dense = eig.reassemble(|l| if l <= thresh { 0.0 } else { l.sqrt() });
    Ok(Point::sym_from_dense(m.dim(), &dense))
}

/// Dense row-major product of two `n x n` matrices.
pub fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

/// `P^T A P` for dense `A` and a matrix `P` whose columns are given as `cols`.
pub(crate) fn congruence(a: &[f64], n: usize, cols: &[Vec<f64>]) -> Vec<f64> {
    let m = cols.len();
    let ap: Vec<Vec<f64>> = cols
        .iter()
        .map(|c| (0..n).map(|i| (0..n).map(|k| a[i * n + k] * c[k]).sum()).collect())
        .collect();
    let mut out = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            out[i * m + j] = cols[i].iter().zip(&ap[j]).map(|(x, y)| x * y).sum();
        }
    }
    // symmetrize roundoff
    for i in 0..m {
        for j in (i + 1)..m {
            let s = 0.5 * (out[i * m + j] + out[j * m + i]);
            out[i * m + j] = s;
            out[j * m + i] = s;
        }
    }
    out
}

/// Orthonormal basis of the row space via modified Gram-Schmidt. Rows whose
/// residual falls below `tol` times their norm are treated as dependent.
pub fn orthonormal_rows(rows: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for r in rows {
        let scale = crate::point::euclid(r);
        if scale == 0.0 {
            continue;
        }
        let mut w = r.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = crate::point::dot(&w, b);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let nw = crate::point::euclid(&w);
        if nw > tol * scale {
            basis.push(w.into_iter().map(|x| x / nw).collect());
        }
    }
    basis
}

pub fn rank(rows: &[Vec<f64>], tol: f64) -> usize {
    orthonormal_rows(rows, tol).len()
}

/// Unit vector orthogonal to every row; `None` when the rows span the whole
/// space.
pub fn kernel_vector(rows: &[Vec<f64>], dim: usize, tol: f64) -> Option<Vec<f64>> {
    let basis = orthonormal_rows(rows, tol);
    if basis.len() >= dim {
        return None;
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for j in 0..dim {
        let mut w = vec![0.0; dim];
        w[j] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let c = crate::point::dot(&w, b);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let nw = crate::point::euclid(&w);
        if best.as_ref().map_or(true, |(n, _)| nw > *n) {
            best = Some((nw, w));
        }
    }
    best.filter(|(n, _)| *n > tol).map(|(n, w)| w.into_iter().map(|x| x / n).collect())
}
