//! Cone geometry: membership, the induced partial order, domination ratios,
//! the Thompson part metric and unit-sphere sampling.
//!
//! Every cone is closed and pointed. Norms: Euclidean on vector cones,
//! Frobenius on `Psd`, sup-norm on `GridConvex`.

use std::f64::consts::SQRT_2;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{input, ConeError, Result};
use crate::linalg::{self, congruence, sym_eigen_point};
use crate::point::{dot, euclid, Point, PointKind};

/// Default membership tolerance (absolute, after normalizing to unit norm).
pub const DEFAULT_TOL: f64 = 1e-9;
/// Default number of intervals for grid-function cones.
pub const DEFAULT_GRID: usize = 1024;
/// Functional values below this (relative to norms) count as exact zeros in
/// domination ratios.
const ZERO_REL: f64 = 1e-12;
/// Relative eigenvalue cutoff separating the range of a PSD matrix from its kernel.
const RANGE_REL: f64 = 1e-10;

/// `M(x/y) = inf { beta > 0 : x <= beta y }`; `+inf` when `y` does not dominate `x`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct DominationRatio(#[serde(with = "crate::json::extended")] pub f64);

impl DominationRatio {
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }
}

/// A polyhedral cone `{x in span : psi_i(x) >= 0}` given by facet functionals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPolyhedral")]
pub struct PolyhedralCone {
    dim: usize,
    facets: Vec<Vec<f64>>,
    span_basis: Option<Vec<Vec<f64>>>,
    #[serde(skip)]
    basis: Vec<Vec<f64>>,
    #[serde(skip)]
    reduced: Vec<Vec<f64>>,
    #[serde(skip)]
    rays: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawPolyhedral {
    dim: usize,
    facets: Vec<Vec<f64>>,
    #[serde(default)]
    span_basis: Option<Vec<Vec<f64>>>,
}

impl TryFrom<RawPolyhedral> for PolyhedralCone {
    type Error = ConeError;

    fn try_from(raw: RawPolyhedral) -> Result<Self> {
        PolyhedralCone::with_span(raw.dim, raw.facets, raw.span_basis)
    }
}

impl PolyhedralCone {
    /// Full-dimensional polyhedral cone in `R^dim`.
    pub fn new(dim: usize, facets: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_span(dim, facets, None)
    }

    pub fn with_span(
        dim: usize,
        facets: Vec<Vec<f64>>,
        span_basis: Option<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        if dim == 0 || facets.is_empty() {
            return Err(ConeError::Construction("polyhedral cone needs dim >= 1 and at least one facet".into()));
        }
        if facets.iter().any(|f| f.len() != dim || f.iter().any(|v| !v.is_finite())) {
            return Err(ConeError::Construction(format!("every facet row needs {dim} finite entries")));
        }
        for (i, a) in facets.iter().enumerate() {
            if euclid(a) == 0.0 {
                return Err(ConeError::Construction(format!("facet {i} is the zero functional")));
            }
            for (j, b) in facets.iter().enumerate().skip(i + 1) {
                let c = dot(a, b) / (euclid(a) * euclid(b));
                if c > 1.0 - 1e-12 {
                    return Err(ConeError::Construction(format!("facets {i} and {j} are proportional")));
                }
            }
        }
        let basis = match &span_basis {
            None => (0..dim)
                .map(|i| {
                    let mut e = vec![0.0; dim];
                    e[i] = 1.0;
                    e
                })
                .collect(),
            Some(rows) => {
                if rows.iter().any(|r| r.len() != dim) {
                    return Err(ConeError::Construction("span basis rows have wrong length".into()));
                }
                let b = linalg::orthonormal_rows(rows, 1e-10);
                if b.len() != rows.len() {
                    return Err(ConeError::Construction("span basis is linearly dependent".into()));
                }
                b
            }
        };
        let reduced: Vec<Vec<f64>> =
            facets.iter().map(|f| basis.iter().map(|b| dot(f, b)).collect()).collect();
        let d = basis.len();
        if linalg::rank(&reduced, 1e-10) < d {
            return Err(ConeError::Construction(
                "cone is not pointed: facet functionals have a common kernel in the span".into(),
            ));
        }
        let mut cone = PolyhedralCone { dim, facets, span_basis, basis, reduced, rays: Vec::new() };
        cone.rays = cone.compute_rays();
        if cone.rays.is_empty() {
            return Err(ConeError::Construction("cone is {0}: no extreme rays".into()));
        }
        Ok(cone)
    }

    /// `R^n_+` written with facet functionals `e_i`.
    pub fn orthant(n: usize) -> Self {
        let facets = (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .collect();
        PolyhedralCone::new(n, facets).expect("orthant is a valid cone")
    }

    /// Cone over a square: `|x1| <= x3, |x2| <= x3`.
    pub fn square() -> Self {
        PolyhedralCone::new(
            3,
            vec![
                vec![-1.0, 0.0, 1.0],
                vec![1.0, 0.0, 1.0],
                vec![0.0, -1.0, 1.0],
                vec![0.0, 1.0, 1.0],
            ],
        )
        .expect("square cone is valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn span_dim(&self) -> usize {
        self.basis.len()
    }

    pub fn facets(&self) -> &[Vec<f64>] {
        &self.facets
    }

    pub fn num_facets(&self) -> usize {
        self.facets.len()
    }

    /// Facet functionals expressed in coordinates of the orthonormal span basis.
    pub fn reduced_facets(&self) -> &[Vec<f64>] {
        &self.reduced
    }

    /// Map span coordinates back to the ambient space.
    pub fn lift(&self, coords: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        for (c, b) in coords.iter().zip(&self.basis) {
            for (xi, bi) in x.iter_mut().zip(b) {
                *xi += c * bi;
            }
        }
        x
    }

    /// Unit extreme rays (ambient coordinates).
    pub fn rays(&self) -> &[Vec<f64>] {
        &self.rays
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.facets.iter().map(|f| dot(f, x)).collect()
    }

    fn span_residual(&self, x: &[f64]) -> f64 {
        if self.span_basis.is_none() {
            return 0.0;
        }
        let coords: Vec<f64> = self.basis.iter().map(|b| dot(b, x)).collect();
        let p = self.lift(&coords);
        euclid(&x.iter().zip(&p).map(|(a, b)| a - b).collect::<Vec<_>>())
    }

    fn compute_rays(&self) -> Vec<Vec<f64>> {
        let d = self.basis.len();
        let n = self.reduced.len();
        let mut rays: Vec<Vec<f64>> = Vec::new();
        let push = |coords: Vec<f64>, rays: &mut Vec<Vec<f64>>| {
            let vals: Vec<f64> = self.reduced.iter().map(|g| dot(g, &coords)).collect();
            let sign = if vals.iter().all(|v| *v >= -1e-10) {
                1.0
            } else if vals.iter().all(|v| *v <= 1e-10) {
                -1.0
            } else {
                return;
            };
            let x: Vec<f64> = self.lift(&coords).into_iter().map(|v| sign * v).collect();
            let nx = euclid(&x);
            let x: Vec<f64> = x.into_iter().map(|v| v / nx).collect();
            if !rays.iter().any(|r| dot(r, &x) > 1.0 - 1e-10) {
                rays.push(x);
            }
        };
        if d == 1 {
            push(vec![1.0], &mut rays);
            return rays;
        }
        for subset in combinations(n, d - 1) {
            let rows: Vec<Vec<f64>> = subset.iter().map(|&i| self.reduced[i].clone()).collect();
            if linalg::rank(&rows, 1e-10) != d - 1 {
                continue;
            }
            if let Some(k) = linalg::kernel_vector(&rows, d, 1e-10) {
                push(k, &mut rays);
            }
        }
        rays
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// A closed pointed cone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Cone {
    /// `R^dim_+`.
    Orthant { dim: usize },
    Polyhedral(PolyhedralCone),
    /// `{x : x_dim >= |(x_1, .., x_{dim-1})|}`.
    Lorentz { dim: usize },
    /// Positive semidefinite `dim x dim` matrices.
    Psd { dim: usize },
    /// Grid samples of nonnegative convex functions on `[0,1]` vanishing at 0,
    /// on the grid with `dim` intervals.
    GridConvex { dim: usize },
}

impl Cone {
    pub fn orthant(n: usize) -> Self {
        Cone::Orthant { dim: n }
    }

    pub fn lorentz(n: usize) -> Self {
        Cone::Lorentz { dim: n }
    }

    pub fn psd(n: usize) -> Self {
        Cone::Psd { dim: n }
    }

    pub fn grid_convex(n: usize) -> Self {
        Cone::GridConvex { dim: n }
    }

    pub fn square() -> Self {
        Cone::Polyhedral(PolyhedralCone::square())
    }

    /// Sanity checks for deserialized descriptors.
    pub fn validate(&self) -> Result<()> {
        match self {
            Cone::Orthant { dim } | Cone::Psd { dim } if *dim == 0 => {
                Err(ConeError::Construction("dimension must be positive".into()))
            }
            Cone::Lorentz { dim } if *dim < 2 => Err(ConeError::Construction("Lorentz cone needs dim >= 2".into())),
            Cone::GridConvex { dim } if *dim < 2 => Err(ConeError::Construction("grid cone needs >= 2 intervals".into())),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Cone::Orthant { dim } => format!("orthant:{dim}"),
            Cone::Polyhedral(p) => format!("polyhedral:{}x{}", p.num_facets(), p.dim()),
            Cone::Lorentz { dim } => format!("lorentz:{dim}"),
            Cone::Psd { dim } => format!("psd:{dim}"),
            Cone::GridConvex { dim } => format!("grid:{dim}"),
        }
    }

    pub fn point_kind(&self) -> PointKind {
        match self {
            Cone::Orthant { .. } | Cone::Polyhedral(_) | Cone::Lorentz { .. } => PointKind::DenseVector,
            Cone::Psd { .. } => PointKind::SymMatrix,
            Cone::GridConvex { .. } => PointKind::GridFunction,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Cone::Orthant { dim } | Cone::Lorentz { dim } | Cone::Psd { dim } | Cone::GridConvex { dim } => *dim,
            Cone::Polyhedral(p) => p.dim(),
        }
    }

    /// The polyhedral description, when the cone has one (orthant included).
    pub fn as_polyhedral(&self) -> Option<PolyhedralCone> {
        match self {
            Cone::Orthant { dim } => Some(PolyhedralCone::orthant(*dim)),
            Cone::Polyhedral(p) => Some(p.clone()),
            _ => None,
        }
    }

    pub fn check_point(&self, x: &Point) -> Result<()> {
        if x.kind() != self.point_kind() || x.dim() != self.dim() {
            return input(format!(
                "point {:?}({}) does not belong to cone {}",
                x.kind(),
                x.dim(),
                self.name()
            ));
        }
        Ok(())
    }

    pub fn zero(&self) -> Point {
        match self.point_kind() {
            PointKind::DenseVector => Point::vector(vec![0.0; self.dim()]),
            PointKind::SymMatrix => Point::sym_diag(&vec![0.0; self.dim()]),
            PointKind::GridFunction => Point::grid(vec![0.0; self.dim() + 1]),
        }
    }

    /// Values of the linear functionals whose nonnegativity defines the cone
    /// (facets for polyhedral cones; `v_1` and second differences on the grid).
    pub fn functionals(&self, x: &Point) -> Option<Vec<f64>> {
        match self {
            Cone::Orthant { .. } => Some(x.data().to_vec()),
            Cone::Polyhedral(p) => Some(p.eval(x.data())),
            Cone::GridConvex { dim } => {
                let v = x.data();
                let mut out = Vec::with_capacity(*dim);
                out.push(v[1]);
                for j in 1..*dim {
                    out.push(v[j + 1] - 2.0 * v[j] + v[j - 1]);
                }
                Some(out)
            }
            _ => None,
        }
    }

    fn functional_norms(&self) -> Vec<f64> {
        match self {
            Cone::Orthant { dim } => vec![1.0; *dim],
            Cone::Polyhedral(p) => p.facets().iter().map(|f| euclid(f)).collect(),
            Cone::GridConvex { dim } => {
                let mut v = vec![6f64.sqrt(); *dim];
                v[0] = 1.0;
                v
            }
            _ => Vec::new(),
        }
    }

    /// Smallest signed slack of `x` (negative means outside). Polyhedral facets
    /// are normalized; grid second differences are raw.
    fn slack(&self, x: &Point) -> f64 {
        match self {
            Cone::Orthant { .. } => x.data().iter().copied().fold(f64::INFINITY, f64::min),
            Cone::Polyhedral(p) => {
                let s = p
                    .facets()
                    .iter()
                    .map(|f| dot(f, x.data()) / euclid(f))
                    .fold(f64::INFINITY, f64::min);
                if p.span_dim() < p.dim() {
                    s.min(-p.span_residual(x.data()))
                } else {
                    s
                }
            }
            Cone::Lorentz { dim } => {
                let v = x.data();
                v[dim - 1] - euclid(&v[..dim - 1])
            }
            Cone::Psd { .. } => linalg::min_eigenvalue(x),
            Cone::GridConvex { .. } => {
                let v = x.data();
                let f = self.functionals(x).unwrap();
                let m = f.into_iter().chain(v.iter().copied()).fold(f64::INFINITY, f64::min);
                m.min(-v[0].abs())
            }
        }
    }

    /// Membership within `tol` after normalizing `x` to unit norm.
    pub fn contains(&self, x: &Point, tol: f64) -> Result<bool> {
        self.check_point(x)?;
        let s = x.norm();
        if s == 0.0 {
            return Ok(true);
        }
        Ok(self.slack(x) >= -tol * s)
    }

    /// Membership slack scaled by `scale`; used by the property testers.
    pub(crate) fn relative_slack(&self, x: &Point, scale: f64) -> f64 {
        if scale == 0.0 {
            return 0.0;
        }
        self.slack(x) / scale
    }

    /// `x <= y` in the cone order: `y - x` in the cone, tolerance relative to
    /// `max(|x|, |y|)`.
    pub fn leq(&self, x: &Point, y: &Point, tol: f64) -> Result<bool> {
        self.check_point(x)?;
        self.check_point(y)?;
        let scale = x.norm().max(y.norm());
        if scale == 0.0 {
            return Ok(true);
        }
        Ok(self.slack(&y.sub(x)) >= -tol * scale)
    }

    /// Strictly interior: slack above `tol * |y|`.
    pub fn is_interior(&self, y: &Point, tol: f64) -> Result<bool> {
        self.check_point(y)?;
        let s = y.norm();
        if s == 0.0 {
            return Ok(false);
        }
        if let Cone::Polyhedral(p) = self {
            if p.span_dim() < p.dim() {
                return Ok(false);
            }
        }
        if let Cone::GridConvex { .. } = self {
            // interior relative to the hyperplane v_0 = 0
            let v = y.data();
            if v[0].abs() > tol * s {
                return Ok(false);
            }
            let m = self.functionals(y).unwrap_or_default().into_iter().chain(v[1..].iter().copied()).fold(f64::INFINITY, f64::min);
            return Ok(m > tol * s);
        }
        Ok(self.slack(y) > tol * s)
    }

    /// Distance (in the cone's norm) from an interior point to the boundary,
    /// for the cones where a closed form exists.
    pub fn boundary_distance(&self, x: &Point) -> Result<f64> {
        self.check_point(x)?;
        match self {
            Cone::Orthant { .. } | Cone::Psd { .. } => Ok(self.slack(x).max(0.0)),
            Cone::Polyhedral(p) if p.span_dim() == p.dim() => Ok(self.slack(x).max(0.0)),
            Cone::Lorentz { .. } => Ok((self.slack(x) / SQRT_2).max(0.0)),
            _ => Err(ConeError::Capability(format!("no boundary distance for {}", self.name()))),
        }
    }

    /// `sup { a >= 0 : a v <= w }` for `v, w` in the cone; `+inf` when `v = 0`.
    pub fn lower_ratio(&self, w: &Point, v: &Point) -> Result<f64> {
        self.check_point(w)?;
        self.check_point(v)?;
        let sv = v.norm();
        if sv == 0.0 {
            return Ok(f64::INFINITY);
        }
        let m = match self {
            Cone::Orthant { .. } | Cone::Polyhedral(_) | Cone::GridConvex { .. } => {
                let fw = self.functionals(w).unwrap();
                let fv = self.functionals(v).unwrap();
                let norms = self.functional_norms();
                let sw = w.norm();
                let mut m = f64::INFINITY;
                for ((a, b), nrm) in fw.iter().zip(&fv).zip(&norms) {
                    let zw = ZERO_REL * nrm * sw;
                    if *b > ZERO_REL * nrm * sv {
                        let a = if a.abs() <= zw { 0.0 } else { *a };
                        m = m.min(a / b);
                    } else if *a < -DEFAULT_TOL * nrm * sw.max(sv) {
                        return Ok(0.0);
                    }
                }
                m
            }
            Cone::Lorentz { dim } => lorentz_lower_ratio(w.data(), v.data(), *dim),
            Cone::Psd { .. } => psd_lower_ratio(w, v),
        };
        Ok(m.max(0.0))
    }

    /// `M(x/y)`.
    pub fn upper_ratio(&self, x: &Point, y: &Point) -> Result<DominationRatio> {
        let m = self.lower_ratio(y, x)?;
        Ok(DominationRatio(if m.is_infinite() {
            0.0
        } else if m == 0.0 {
            f64::INFINITY
        } else {
            1.0 / m
        }))
    }

    /// Thompson part metric `log max(M(x/y), M(y/x))`; `+inf` across parts.
    pub fn thompson_distance(&self, x: &Point, y: &Point) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        match (x.is_zero(), y.is_zero()) {
            (true, true) => return Ok(0.0),
            (true, false) | (false, true) => return Ok(f64::INFINITY),
            _ => {}
        }
        let a = self.upper_ratio(x, y)?.value();
        let b = self.upper_ratio(y, x)?.value();
        let m = a.max(b);
        Ok(if m.is_finite() { m.ln().max(0.0) } else { f64::INFINITY })
    }

    /// `lambda x <= xk`, the domination primitive behind condition G.
    pub fn dominates_at_level(&self, x: &Point, xk: &Point, lambda: f64, tol: f64) -> Result<bool> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return input(format!("lambda must lie in (0,1), got {lambda}"));
        }
        self.leq(&x.scaled(lambda), xk, tol)
    }

    /// A canonical interior point of unit norm.
    pub fn interior_point(&self) -> Point {
        let p = match self {
            Cone::Orthant { dim } => Point::vector(vec![1.0; *dim]),
            Cone::Polyhedral(p) => {
                let mut x = vec![0.0; p.dim()];
                for r in p.rays() {
                    for (xi, ri) in x.iter_mut().zip(r) {
                        *xi += ri;
                    }
                }
                Point::vector(x)
            }
            Cone::Lorentz { dim } => {
                let mut x = vec![0.0; *dim];
                x[dim - 1] = 1.0;
                Point::vector(x)
            }
            Cone::Psd { dim } => Point::identity(*dim),
            Cone::GridConvex { dim } => Point::grid_from_fn(*dim, |t| t + t * t),
        };
        p.normalized().expect("interior point is nonzero")
    }

    /// Deterministic unit probes along extreme directions, plus the canonical
    /// interior point.
    pub fn extreme_probes(&self) -> Vec<Point> {
        let mut out = match self {
            Cone::Orthant { dim } => (0..*dim)
                .map(|i| {
                    let mut e = vec![0.0; *dim];
                    e[i] = 1.0;
                    Point::vector(e)
                })
                .collect(),
            Cone::Polyhedral(p) => p.rays().iter().map(|r| Point::vector(r.clone())).collect(),
            Cone::Lorentz { dim } => {
                let mut v = Vec::new();
                for i in 0..dim - 1 {
                    for s in [1.0, -1.0] {
                        let mut e = vec![0.0; *dim];
                        e[i] = s;
                        e[dim - 1] = 1.0;
                        v.push(Point::vector(e).normalized().unwrap());
                    }
                }
                v
            }
            Cone::Psd { dim } => (0..*dim)
                .map(|i| {
                    let mut d = vec![0.0; *dim];
                    d[i] = 1.0;
                    Point::sym_diag(&d)
                })
                .collect(),
            Cone::GridConvex { dim } => [0.0, 0.25, 0.5, 0.75]
                .iter()
                .map(|a| hinge(*dim, (a * *dim as f64).round() as usize))
                .collect(),
        };
        out.push(self.interior_point());
        out
    }

    /// Random point of the cone with unit norm, mixing extreme directions,
    /// lower-dimensional faces and interior combinations.
    pub fn sample_unit<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let mode: f64 = rng.gen();
        let p = match self {
            Cone::Orthant { dim } => {
                let n = *dim;
                let mut x = vec![0.0; n];
                if mode < 0.25 {
                    x[rng.gen_range(0..n)] = 1.0;
                } else if mode < 0.5 {
                    let keep = rng.gen_range(0..n);
                    for (i, xi) in x.iter_mut().enumerate() {
                        if i == keep || rng.gen_bool(0.5) {
                            *xi = rng.gen_range(0.05..1.0);
                        }
                    }
                } else {
                    for xi in x.iter_mut() {
                        *xi = rng.gen_range(0.0..1.0);
                    }
                }
                Point::vector(x)
            }
            Cone::Polyhedral(p) => {
                let rays = p.rays();
                let mut x = vec![0.0; p.dim()];
                let mut add = |r: &[f64], w: f64| {
                    for (xi, ri) in x.iter_mut().zip(r) {
                        *xi += w * ri;
                    }
                };
                if mode < 0.25 {
                    add(&rays[rng.gen_range(0..rays.len())], 1.0);
                } else if mode < 0.5 {
                    let keep = rng.gen_range(0..rays.len());
                    for (i, r) in rays.iter().enumerate() {
                        if i == keep || rng.gen_bool(0.5) {
                            add(r, rng.gen_range(0.05..1.0));
                        }
                    }
                } else {
                    for r in rays {
                        add(r, rng.gen_range(0.0..1.0));
                    }
                }
                if euclid(&x) == 0.0 {
                    x = rays[0].clone();
                }
                Point::vector(x)
            }
            Cone::Lorentz { dim } => {
                let n = *dim;
                let mut u: Vec<f64> = (0..n - 1).map(|_| gaussian(rng)).collect();
                let nu = euclid(&u);
                let radius = if mode < 0.3 { 1.0 } else { rng.gen_range(0.0..1.0) };
                for ui in u.iter_mut() {
                    *ui *= radius / nu.max(1e-300);
                }
                u.push(1.0);
                Point::vector(u)
            }
            Cone::Psd { dim } => {
                let n = *dim;
                let terms = if mode < 0.3 {
                    1
                } else if mode < 0.6 {
                    rng.gen_range(1..=n)
                } else {
                    n + 1
                };
                let mut dense = vec![0.0; n * n];
                for _ in 0..terms {
                    let v: Vec<f64> = (0..n).map(|_| gaussian(rng)).collect();
                    for i in 0..n {
                        for j in 0..n {
                            dense[i * n + j] += v[i] * v[j];
                        }
                    }
                }
                Point::sym_from_dense(n, &dense)
            }
            Cone::GridConvex { dim } => {
                let n = *dim;
                if mode < 0.2 {
                    hinge(n, rng.gen_range(0..n))
                } else if mode < 0.4 {
                    let p = rng.gen_range(1.0..8.0);
                    Point::grid_from_fn(n, |t: f64| t.powf(p))
                } else {
                    let mut v = vec![0.0; n + 1];
                    let slope = rng.gen_range(0.0..1.0);
                    for (j, vj) in v.iter_mut().enumerate() {
                        *vj = slope * j as f64 / n as f64;
                    }
                    for _ in 0..rng.gen_range(1..=4) {
                        let h = hinge(n, rng.gen_range(0..n));
                        let w = rng.gen_range(0.05..1.0);
                        for (vj, hj) in v.iter_mut().zip(h.data()) {
                            *vj += w * hj;
                        }
                    }
                    Point::grid(v)
                }
            }
        };
        match self {
            // sup-norm of a nonnegative increasing grid function is its last sample
            Cone::GridConvex { .. } => {
                let last = *p.data().last().unwrap();
                let mut v: Vec<f64> = p.data().iter().map(|x| x / last).collect();
                *v.last_mut().unwrap() = 1.0;
                Point::grid(v)
            }
            _ => p.normalized().expect("sample is nonzero"),
        }
    }

    /// `sample_unit` with a fresh generator seeded by `seed`.
    pub fn sample_unit_seeded(&self, seed: u64) -> Point {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_unit(&mut rng)
    }
}

/// `(t - t_a)_+` on the grid with `n` intervals, normalized so that `f(1) = 1`.
fn hinge(n: usize, a: usize) -> Point {
    let denom = (n - a) as f64;
    Point::grid((0..=n).map(|j| if j > a { (j - a) as f64 / denom } else { 0.0 }).collect())
}

pub(crate) fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn lorentz_lower_ratio(w: &[f64], v: &[f64], n: usize) -> f64 {
    let (wb, wn) = (&w[..n - 1], w[n - 1]);
    let (vb, vn) = (&v[..n - 1], v[n - 1]);
    let nwb = euclid(wb);
    let c = ((wn - nwb) * (wn + nwb)).max(0.0);
    let b = -2.0 * (wn * vn - dot(wb, vb));
    let cap = if vn > 0.0 { wn / vn } else { f64::INFINITY };
    // b^2 - 4ac through the Lagrange identity, free of cancellation when w ~ v
    let mixed: f64 = wb.iter().zip(vb).map(|(x, y)| (wn * y - vn * x).powi(2)).sum();
    let mut wedge = 0.0;
    for i in 0..n - 1 {
        for j in i + 1..n - 1 {
            wedge += (wb[i] * vb[j] - wb[j] * vb[i]).powi(2);
        }
    }
    let disc = (4.0 * (mixed - wedge)).max(0.0);
    let denom = -b + disc.sqrt();
    let root = if denom > 0.0 { 2.0 * c / denom } else { f64::INFINITY };
    root.min(cap)
}

/// `sup { a : a V <= W }` on PSD matrices, through the Schur complement of
/// `W` on the kernel of `V`.
fn psd_lower_ratio(w: &Point, v: &Point) -> f64 {
    let n = v.dim();
    let ev = sym_eigen_point(v);
    let top = ev.values.last().copied().unwrap_or(0.0);
    let cut = RANGE_REL * top.abs();
    let mut range = Vec::new();
    let mut diag = Vec::new();
    let mut kernel = Vec::new();
    for k in 0..n {
        if ev.values[k] > cut {
            range.push(ev.column(k));
            diag.push(ev.values[k]);
        } else {
            kernel.push(ev.column(k));
        }
    }
    if range.is_empty() {
        return f64::INFINITY;
    }
    let wd = w.to_dense();
    let r = range.len();
    let mut s = congruence(&wd, n, &range);
    if !kernel.is_empty() {
        let m = kernel.len();
        let wnn = congruence(&wd, n, &kernel);
        let en = crate::linalg::sym_eigen(&wnn, m);
        let wnorm = w.norm().max(1e-300);
        // cross block W_RN as r x m
        let wrn: Vec<f64> = (0..r)
            .flat_map(|i| {
                let ri = &range[i];
                let wd = &wd;
                kernel.iter().map(move |kj| {
                    let mut acc = 0.0;
                    for a in 0..n {
                        for b in 0..n {
                            acc += ri[a] * wd[a * n + b] * kj[b];
                        }
                    }
                    acc
                })
            })
            .collect();
        for k in 0..m {
            let lam = en.values[k];
            if lam <= 1e-12 * wnorm {
                continue;
            }
            let u = en.column(k);
            let proj: Vec<f64> = (0..r).map(|i| (0..m).map(|j| wrn[i * m + j] * u[j]).sum()).collect();
            for i in 0..r {
                for j in 0..r {
                    s[i * r + j] -= proj[i] * proj[j] / lam;
                }
            }
        }
    }
    for i in 0..r {
        for j in 0..r {
            s[i * r + j] /= (diag[i] * diag[j]).sqrt();
        }
    }
    crate::linalg::sym_eigen(&s, r).values[0]
}
