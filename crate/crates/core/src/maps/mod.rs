//! Order-preserving homogeneous maps: general linear maps, the orthant
//! lattice map, power-mean combinations, PSD trace maps, composition
//! operators on grid functions and Lorentz series maps.

mod builders;
mod checks;
mod inner;
mod presets;

use serde::{Deserialize, Serialize};

use crate::cone::Cone;
use crate::error::{input, ConeError, Result};
use crate::linalg;
use crate::parts::PartSignature;
use crate::point::{dot, euclid, Point, PointKind};

pub use builders::{build_lattice_map, build_power_mean_map, build_lorentz_series_map, default_lattice_lambdas, lorentz_exposed_point, BuiltMap};
pub use checks::{check_homogeneous, check_order_preserving, PropertyReport};
pub use inner::{compose_grid, compose_value, eps_k, phi_k_eval, InnerMap};
pub use presets::{preset, psd_f, psd_g, psd_x_alpha, psd_z_theta, PresetOptions, PRESET_NAMES};

/// Slack allowed when checking that an argument lies in a map's own cone.
const DOMAIN_TOL: f64 = 1e-8;
/// Facet values below this (relative) are treated as exact zeros in power means.
const PSI_ZERO_REL: f64 = 1e-13;

/// One summand `lambda * M_r(I)(x) * u` of a power-mean combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerMeanTerm {
    pub lambda: f64,
    pub signature: PartSignature,
    pub direction: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum MapDescriptor {
    /// `x -> A x` on the coordinate data of a point (packed for matrices).
    Linear { matrix: Vec<Vec<f64>> },
    /// `x -> max_I lambda_I (min_{i in I} x_i) chi^I` on `R^n_+`; entry
    /// `m - 1` of `lambdas` belongs to the subset with bit mask `m`.
    Lattice { n: usize, lambdas: Vec<f64> },
    /// `x -> sum_P lambda_P M_r(I(P))(x) u^P` on the cone cut out by `facets`.
    PowerMeanCombo {
        #[serde(with = "crate::json::extended")]
        r: f64,
        facets: Vec<Vec<f64>>,
        terms: Vec<PowerMeanTerm>,
    },
    /// `X -> (tr(XA) X)^{1/2}`, conjugated as `B^T (.) B` when `b` is set.
    PsdTrace { n: usize, a: Vec<f64>, b: Option<Vec<f64>> },
    /// `f -> f o phi` on grid functions.
    Composition { inner: InnerMap },
    /// `x -> sum_k 2^-k lambda_k (min_{m != k} phi_m(x)) x^k` on the Lorentz
    /// cone in `R^3`, where `phi_m(x) = x1 cos t_m + x2 sin t_m + x3`, `t_0 = 0`.
    LorentzSeries { angles: Vec<f64>, weights: Vec<f64> },
    /// `x -> c f(x)`.
    Scaled { factor: f64, map: Box<MapDescriptor> },
    /// `x -> f_1(x) + ... + f_j(x)`.
    Sum { maps: Vec<MapDescriptor> },
}

/// Cap on Lorentz series length; `2^-K` stays far from underflow.
pub const MAX_SERIES: usize = 40;
/// Cap on the lattice map dimension (table has `2^n - 1` entries).
pub const MAX_LATTICE_DIM: usize = 16;

impl MapDescriptor {
    pub fn zero(len: usize) -> Self {
        MapDescriptor::Linear { matrix: vec![vec![0.0; len]; len] }
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        MapDescriptor::Linear {
            matrix: (0..n)
                .map(|i| {
                    let mut row = vec![0.0; n];
                    row[i] = d[i];
                    row
                })
                .collect(),
        }
    }

    pub fn scaled(self, factor: f64) -> Self {
        MapDescriptor::Scaled { factor, map: Box::new(self) }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            MapDescriptor::Linear { matrix } => {
                let n = matrix.len();
                if n == 0 || matrix.iter().any(|r| r.len() != n || !finite(r)) {
                    return input("linear map needs a nonempty square finite matrix");
                }
            }
            MapDescriptor::Lattice { n, lambdas } => {
                if *n == 0 || *n > MAX_LATTICE_DIM {
                    return input(format!("lattice dimension must lie in [1, {MAX_LATTICE_DIM}]"));
                }
                if lambdas.len() != (1 << n) - 1 {
                    return input(format!("lattice map needs {} coefficients", (1 << n) - 1));
                }
                if lambdas.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
                    return input("lattice coefficients must be positive and finite");
                }
                for m in 1..(1usize << n) {
                    for j in 0..*n {
                        let sup = m | (1 << j);
                        if sup != m && lambdas[m - 1] >= lambdas[sup - 1] {
                            return input(format!(
                                "lattice coefficients must increase strictly along inclusions (mask {m} vs {sup})"
                            ));
                        }
                    }
                }
            }
            MapDescriptor::PowerMeanCombo { r, facets, terms } => {
                if r.is_nan() || *r >= 0.0 {
                    return input("power-mean exponent must be negative or -infinity");
                }
                let d = facets.first().map_or(0, |f| f.len());
                if d == 0 || facets.iter().any(|f| f.len() != d || !finite(f)) {
                    return input("power-mean facets must be nonempty rows of equal length");
                }
                if facets.len() > 32 {
                    return input("at most 32 facets");
                }
                for t in terms {
                    if !(t.lambda.is_finite() && t.lambda > 0.0) {
                        return input("power-mean weights must be positive");
                    }
                    if t.signature.is_empty() || t.signature.indices().iter().any(|&i| i >= facets.len()) {
                        return input("power-mean signature must be a nonempty set of facet indices");
                    }
                    if t.direction.len() != d || !finite(&t.direction) {
                        return input("power-mean direction has wrong length");
                    }
                }
            }
            MapDescriptor::PsdTrace { n, a, b } => {
                let len = n * (n + 1) / 2;
                if *n == 0 || a.len() != len || !finite(a) {
                    return input(format!("trace map needs packed {n}x{n} matrix A"));
                }
                if let Some(b) = b {
                    if b.len() != len || !finite(b) {
                        return input(format!("trace map needs packed {n}x{n} matrix B"));
                    }
                }
            }
            MapDescriptor::Composition { inner } => inner.validate()?,
            MapDescriptor::LorentzSeries { angles, weights } => {
                let k = angles.len();
                if k == 0 || k > MAX_SERIES {
                    return input(format!("Lorentz series length must lie in [1, {MAX_SERIES}]"));
                }
                if weights.len() != k {
                    return input("one weight per angle");
                }
                if angles.iter().any(|a| !a.is_finite() || a.rem_euclid(std::f64::consts::TAU) == 0.0) {
                    return input("angles must be finite and nonzero mod 2pi");
                }
                for i in 0..k {
                    for j in i + 1..k {
                        let d = (angles[i] - angles[j]).rem_euclid(std::f64::consts::TAU);
                        if d == 0.0 {
                            return input("angles must be pairwise distinct mod 2pi");
                        }
                    }
                }
                if weights.iter().any(|w| !(*w > 0.0 && *w <= 1.0)) {
                    return input("weights must lie in (0,1]");
                }
            }
            MapDescriptor::Scaled { factor, map } => {
                if !(factor.is_finite() && *factor >= 0.0) {
                    return input("scale factor must be finite and nonnegative");
                }
                map.validate()?;
            }
            MapDescriptor::Sum { maps } => {
                if maps.is_empty() {
                    return input("sum of no maps");
                }
                for m in maps {
                    m.validate()?;
                }
            }
        }
        Ok(())
    }

    /// The cone a map is built for, when intrinsic to the variant.
    pub fn natural_cone(&self) -> Option<Cone> {
        match self {
            MapDescriptor::Lattice { n, .. } => Some(Cone::orthant(*n)),
            MapDescriptor::PowerMeanCombo { facets, .. } => {
                let d = facets[0].len();
                if facets.len() == d && facets.iter().enumerate().all(|(i, f)| {
                    f.iter().enumerate().all(|(j, v)| *v == if i == j { 1.0 } else { 0.0 })
                }) {
                    return Some(Cone::orthant(d));
                }
                crate::cone::PolyhedralCone::new(d, facets.clone()).ok().map(Cone::Polyhedral)
            }
            MapDescriptor::PsdTrace { n, .. } => Some(Cone::psd(*n)),
            MapDescriptor::LorentzSeries { .. } => Some(Cone::lorentz(3)),
            MapDescriptor::Scaled { map, .. } => map.natural_cone(),
            MapDescriptor::Sum { maps } => maps.iter().find_map(|m| m.natural_cone()),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MapDescriptor::Linear { .. } => "linear",
            MapDescriptor::Lattice { .. } => "lattice",
            MapDescriptor::PowerMeanCombo { .. } => "power_mean_combo",
            MapDescriptor::PsdTrace { .. } => "psd_trace",
            MapDescriptor::Composition { .. } => "composition",
            MapDescriptor::LorentzSeries { .. } => "lorentz_series",
            MapDescriptor::Scaled { .. } => "scaled",
            MapDescriptor::Sum { .. } => "sum",
        }
    }

    /// The composition inner map, looking through nonnegative scalings.
    pub fn composition_inner(&self) -> Option<(f64, &InnerMap)> {
        match self {
            MapDescriptor::Composition { inner } => Some((1.0, inner)),
            MapDescriptor::Scaled { factor, map } => map.composition_inner().map(|(c, i)| (c * factor, i)),
            _ => None,
        }
    }

    /// `f(x)`.
    pub fn apply(&self, x: &Point) -> Result<Point> {
        match self {
            MapDescriptor::Linear { matrix } => {
                if matrix.len() != x.data().len() {
                    return input(format!("linear map of size {} applied to {} coordinates", matrix.len(), x.data().len()));
                }
                Ok(x.with_data(matrix.iter().map(|row| dot(row, x.data())).collect()))
            }
            MapDescriptor::Lattice { n, lambdas } => {
                expect_vector(x, *n)?;
                in_domain(Cone::orthant(*n).contains(x, DOMAIN_TOL)?)?;
                Ok(Point::vector(lattice_apply(*n, lambdas, x.data())))
            }
            MapDescriptor::PowerMeanCombo { r, facets, terms } => {
                let d = facets[0].len();
                expect_vector(x, d)?;
                let s = x.norm();
                let psi: Vec<f64> = facets.iter().map(|f| dot(f, x.data())).collect();
                for (p, f) in psi.iter().zip(facets) {
                    if *p < -DOMAIN_TOL * euclid(f) * s {
                        return input("point is outside the power-mean map's cone");
                    }
                }
                let psi: Vec<f64> = psi
                    .iter()
                    .zip(facets)
                    .map(|(p, f)| if *p <= PSI_ZERO_REL * euclid(f) * s { 0.0 } else { *p })
                    .collect();
                let mut y = vec![0.0; d];
                for t in terms {
                    let vals: Vec<f64> = t.signature.indices().iter().map(|&i| psi[i]).collect();
                    let m = power_mean_values(&vals, *r);
                    if m > 0.0 {
                        for (yi, ui) in y.iter_mut().zip(&t.direction) {
                            *yi += t.lambda * m * ui;
                        }
                    }
                }
                Ok(Point::vector(y))
            }
            MapDescriptor::PsdTrace { n, a, b } => {
                if x.kind() != PointKind::SymMatrix || x.dim() != *n {
                    return input(format!("trace map expects a {n}x{n} symmetric matrix"));
                }
                let am = Point::sym_packed(*n, a.clone());
                let tr = frobenius_inner(x, &am);
                let scale = x.norm() * am.norm();
                if tr < -1e-9 * scale {
                    return Err(ConeError::Domain(format!("tr(XA) = {tr} is negative")));
                }
                let root = match linalg::sym_sqrt(x, 1e-12) {
                    Ok(r) => r,
                    Err(ConeError::Domain(m)) => return input(format!("argument is not positive semidefinite: {m}")),
                    Err(e) => return Err(e),
                };
                let s = root.scaled(tr.max(0.0).sqrt());
                match b {
                    None => Ok(s),
                    Some(b) => {
                        let bd = Point::sym_packed(*n, b.clone()).to_dense();
                        let sd = s.to_dense();
                        let mut bt = vec![0.0; n * n];
                        for i in 0..*n {
                            for j in 0..*n {
                                bt[i * n + j] = bd[j * n + i];
                            }
                        }
                        let prod = linalg::matmul(&linalg::matmul(&bt, &sd, *n), &bd, *n);
                        Ok(Point::sym_from_dense(*n, &prod))
                    }
                }
            }
            MapDescriptor::Composition { inner } => {
                if x.kind() != PointKind::GridFunction {
                    return input("composition operator expects a grid function");
                }
                in_domain(Cone::grid_convex(x.dim()).contains(x, DOMAIN_TOL)?)?;
                Ok(Point::grid(compose_grid(x.data(), inner)))
            }
            MapDescriptor::LorentzSeries { angles, weights } => {
                expect_vector(x, 3)?;
                in_domain(Cone::lorentz(3).contains(x, DOMAIN_TOL)?)?;
                Ok(Point::vector(lorentz_series_apply(angles, weights, x.data())))
            }
            MapDescriptor::Scaled { factor, map } => Ok(map.apply(x)?.scaled(*factor)),
            MapDescriptor::Sum { maps } => {
                let mut acc = maps[0].apply(x)?;
                for m in &maps[1..] {
                    let y = m.apply(x)?;
                    acc.check_same_space(&y)?;
                    acc = acc.add(&y);
                }
                Ok(acc)
            }
        }
    }

    /// `f(x)` after checking that `x` and the image live in `cone`'s space.
    pub fn apply_in(&self, cone: &Cone, x: &Point) -> Result<Point> {
        cone.check_point(x)?;
        let y = self.apply(x)?;
        cone.check_point(&y)?;
        Ok(y)
    }
}

fn expect_vector(x: &Point, n: usize) -> Result<()> {
    if x.kind() != PointKind::DenseVector || x.dim() != n {
        return input(format!("expected a vector of dimension {n}, got {:?}({})", x.kind(), x.dim()));
    }
    Ok(())
}

fn in_domain(ok: bool) -> Result<()> {
    if ok {
        Ok(())
    } else {
        input("point is outside the map's cone")
    }
}

fn frobenius_inner(x: &Point, a: &Point) -> f64 {
    let n = x.dim();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += x.entry(i, j) * a.entry(i, j);
        }
    }
    acc
}

fn lattice_apply(n: usize, lambdas: &[f64], x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0f64; n];
    for mask in 1usize..(1 << n) {
        let mut m = f64::INFINITY;
        for (i, xi) in x.iter().enumerate() {
            if mask >> i & 1 == 1 {
                m = m.min(*xi);
            }
        }
        let v = lambdas[mask - 1] * m.max(0.0);
        for (i, yi) in y.iter_mut().enumerate() {
            if mask >> i & 1 == 1 && v > *yi {
                *yi = v;
            }
        }
    }
    y
}

/// `phi_m(x)` for `m = 0..=K` with `t_0 = 0`.
pub(crate) fn lorentz_functionals(angles: &[f64], x: &[f64]) -> Vec<f64> {
    std::iter::once(0.0)
        .chain(angles.iter().copied())
        .map(|t| x[0] * t.cos() + x[1] * t.sin() + x[2])
        .collect()
}

fn lorentz_series_apply(angles: &[f64], weights: &[f64], x: &[f64]) -> Vec<f64> {
    let phi = lorentz_functionals(angles, x);
    // two smallest values give every "min over m != k" in one pass
    let (mut i1, mut v1, mut v2) = (usize::MAX, f64::INFINITY, f64::INFINITY);
    for (i, v) in phi.iter().enumerate() {
        if *v < v1 {
            v2 = v1;
            v1 = *v;
            i1 = i;
        } else if *v < v2 {
            v2 = *v;
        }
    }
    let mut y = [0.0; 3];
    for (k, (&t, &w)) in angles.iter().zip(weights).enumerate() {
        let idx = k + 1;
        let m = if idx == i1 { v2 } else { v1 };
        let c = (0.5f64).powi(idx as i32) * w * m.max(0.0);
        if c > 0.0 {
            let xk = lorentz_exposed_point(t);
            for (yi, xi) in y.iter_mut().zip(xk) {
                *yi += c * xi;
            }
        }
    }
    y.to_vec()
}

/// `M_r` of already-evaluated facet values.
pub(crate) fn power_mean_values(vals: &[f64], r: f64) -> f64 {
    let m = vals.iter().copied().fold(f64::INFINITY, f64::min);
    if !(m > 0.0) {
        return 0.0;
    }
    if r == f64::NEG_INFINITY {
        return m;
    }
    let s: f64 = vals.iter().map(|v| (v / m).powf(r)).sum();
    m * s.powf(1.0 / r)
}

/// `M_r(I)(x) = (sum_{i in I} psi_i(x)^r)^{1/r}`, and `min_i psi_i(x)` at `r = -inf`.
pub fn power_mean(signature: PartSignature, r: f64, facets: &[Vec<f64>], x: &Point) -> Result<f64> {
    if r.is_nan() || r >= 0.0 {
        return input(format!("power-mean exponent must be negative, got {r}"));
    }
    if signature.is_empty() {
        return input("power mean over an empty index set");
    }
    let idx = signature.indices();
    if idx.iter().any(|&i| i >= facets.len()) {
        return input("signature refers to a missing facet");
    }
    if facets.iter().any(|f| f.len() != x.data().len()) {
        return input("facet length does not match the point");
    }
    let vals: Vec<f64> = idx.iter().map(|&i| dot(&facets[i], x.data()).max(0.0)).collect();
    Ok(power_mean_values(&vals, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn e(n: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    }

    #[test]
    fn power_mean_examples() {
        let facets: Vec<Vec<f64>> = (0..3).map(|i| e(3, i)).collect();
        let all = PartSignature::from_indices(&[0, 1, 2]);
        let two = PartSignature::from_indices(&[0, 1]);
        let x = Point::vector(vec![1.0, 1.0, 0.0]);
        assert_eq!(power_mean(two, -1.0, &facets, &x).unwrap(), 0.5);
        let y = Point::vector(vec![2.0, 5.0, 3.0]);
        assert_eq!(power_mean(all, f64::NEG_INFINITY, &facets, &y).unwrap(), 2.0);
        assert_eq!(power_mean(all, -2.0, &facets, &x).unwrap(), 0.0);
        assert!(power_mean(all, 0.0, &facets, &x).is_err());
        assert!(power_mean(all, 1.5, &facets, &x).is_err());
        // harmonic-type mean of (2,5,3) at r = -1 is 1/(1/2+1/5+1/3)
        let h = power_mean(all, -1.0, &facets, &y).unwrap();
        assert!((h - 1.0 / (0.5 + 0.2 + 1.0 / 3.0)).abs() < 1e-15);
        // stays finite where the naive sum of powers overflows
        let tiny = Point::vector(vec![1e-300, 2e-300, 1.0]);
        let v = power_mean(two, -4.0, &facets, &tiny).unwrap();
        assert!((v / 1e-300 - (1.0 + 1.0 / 16.0f64).powf(-0.25)).abs() < 1e-14);
    }

    #[test]
    fn lattice_example() {
        let map = MapDescriptor::Lattice { n: 2, lambdas: vec![0.2, 0.3, 0.9] };
        map.validate().unwrap();
        let y = map.apply(&Point::vector(vec![1.0, 1.0])).unwrap();
        assert_eq!(y.data(), &[0.9, 0.9]);
        let bad = MapDescriptor::Lattice { n: 2, lambdas: vec![0.2, 0.3, 0.25] };
        assert!(bad.validate().is_err());
        assert!(map.apply(&Point::vector(vec![-1.0, 1.0])).is_err());
    }

    #[test]
    fn psd_trace_on_rank_one() {
        let map = presets::psd_f(3);
        let z = psd_z_theta(3, PI / 3.0);
        let y = map.apply(&z).unwrap();
        let expect = z.scaled(0.5);
        assert!(y.distance(&expect) < 1e-12);
        let x = Point::sym_from_dense(2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(presets::psd_f(2).apply(&x), Err(ConeError::Input(_))));
        let neg_a = MapDescriptor::PsdTrace { n: 2, a: vec![-1.0, 0.0, 0.0], b: None };
        assert!(matches!(neg_a.apply(&Point::identity(2)), Err(ConeError::Domain(_))));
    }

    #[test]
    fn psd_x_alpha_image() {
        let map = presets::psd_f(4);
        for alpha in [0.25, 0.5, 1.0] {
            let y = map.apply(&psd_x_alpha(4, alpha)).unwrap();
            let expect = Point::sym_diag(&[1.0, alpha.sqrt(), 1.0, 1.0]);
            assert!(y.distance(&expect) < 1e-13);
        }
        let g = presets::psd_g(3).unwrap();
        let y = g.apply(&Point::identity(3)).unwrap();
        assert!(y.distance(&Point::sym_diag(&[1.0, 1.0, 0.0])) < 1e-13);
        assert!(presets::psd_g(2).is_err());
    }

    #[test]
    fn halving_on_linear_grid() {
        let map = MapDescriptor::Composition { inner: InnerMap::Halving };
        let g = Point::grid_from_fn(16, |t| t);
        assert_eq!(map.apply(&g).unwrap(), g.scaled(0.5));
        assert!(map.apply(&Point::vector(vec![1.0])).is_err());
    }

    #[test]
    fn lorentz_series_eigen_relation() {
        let angles = vec![1.0, 0.5];
        let map = MapDescriptor::LorentzSeries { angles: angles.clone(), weights: vec![1.0, 1.0] };
        let x1 = Point::vector(lorentz_exposed_point(1.0).to_vec());
        let phi = |t: f64| (1.0 - (t - 1.0).cos()) / 2f64.sqrt();
        let rho = 0.5 * phi(0.0).min(phi(0.5));
        let y = map.apply(&x1).unwrap();
        assert!(y.distance(&x1.scaled(rho)) < 1e-15);
        for (m, v) in lorentz_functionals(&angles, x1.data()).iter().enumerate() {
            let t = [0.0, 1.0, 0.5][m];
            assert!((v - phi(t)).abs() < 1e-15);
        }
        let dup = MapDescriptor::LorentzSeries { angles: vec![1.0, 1.0], weights: vec![1.0, 1.0] };
        assert!(dup.validate().is_err());
        let zero = MapDescriptor::LorentzSeries { angles: vec![0.0], weights: vec![1.0] };
        assert!(zero.validate().is_err());
    }

    #[test]
    fn descriptor_json_round_trip() {
        let maps = vec![
            MapDescriptor::diagonal(&[2.0, 3.0]),
            MapDescriptor::Composition { inner: InnerMap::PhiK { k: 3 } },
            presets::psd_g(3).unwrap(),
            build_power_mean_map(&crate::parts::enumerate_parts(&crate::cone::PolyhedralCone::orthant(2)).unwrap(), f64::NEG_INFINITY, None, None)
                .unwrap()
                .map,
            MapDescriptor::diagonal(&[1.0]).scaled(0.5),
        ];
        for m in maps {
            let s = serde_json::to_string(&m).unwrap();
            let back: MapDescriptor = serde_json::from_str(&s).unwrap();
            assert_eq!(back, m, "{s}");
        }
        let s = serde_json::to_string(&MapDescriptor::Composition { inner: InnerMap::Halving }).unwrap();
        assert_eq!(s, r#"{"variant":"composition","inner":{"kind":"halving"}}"#);
    }
}
