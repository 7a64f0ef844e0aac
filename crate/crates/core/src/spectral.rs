//! Cone spectral radius estimates with Collatz–Wielandt certificates,
//! normalized power iteration and part-by-part spectrum scans.

use rayon::prelude::*;
use serde::Serialize;

use crate::cone::{Cone, DEFAULT_TOL};
use crate::error::{input, ConeError, Result};
use crate::maps::{InnerMap, MapDescriptor};
use crate::parts::{part_of, PartSignature, PartsLattice, PART_TOL};
use crate::point::Point;

/// Relative gap below which two eigenvalues of one part count as equal.
pub const SAME_VALUE_REL: f64 = 1e-7;

/// Approximate solution of `f(x) = value * x` at unit `x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenPair {
    pub vector: Point,
    pub value: f64,
    /// `|f(x) - value x|` at the stored unit vector.
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub part: Option<PartSignature>,
}

impl EigenPair {
    /// Normalize `x` and measure the residual of the claimed eigenvalue.
    pub fn certify(map: &MapDescriptor, x: &Point, value: f64, part: Option<PartSignature>) -> Result<Self> {
        let vector = x.normalized().ok_or_else(|| ConeError::Input("eigenvector must be nonzero".into()))?;
        let residual = map.apply(&vector)?.distance(&vector.scaled(value));
        Ok(EigenPair { vector, value, residual, part })
    }
}

/// Compensated (Neumaier) running sum.
#[derive(Debug, Clone, Copy, Default)]
struct LogSum {
    sum: f64,
    comp: f64,
}

impl LogSum {
    fn add(&mut self, v: f64) {
        if !v.is_finite() {
            self.sum += v;
            return;
        }
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// One entry of a norm trace: `log |f^k| / k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    pub k: usize,
    #[serde(with = "crate::json::extended")]
    pub log_norm_per_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusEstimate {
    pub lower: f64,
    #[serde(with = "crate::json::extended")]
    pub upper: f64,
    pub value: f64,
    pub norm_trace: Vec<TracePoint>,
    /// Number of sampled starting points (0 on the analytic path).
    pub samples: usize,
    pub method: String,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadiusParams {
    pub kmax: usize,
    pub samples: usize,
    pub seed: u64,
    /// Convergence tolerance for the refining eigen iteration.
    pub tol: f64,
    pub maxit: usize,
}

impl Default for RadiusParams {
    fn default() -> Self {
        RadiusParams { kmax: 64, samples: 64, seed: 42, tol: 1e-12, maxit: 5000 }
    }
}

/// `log |f^k(x0)|` for `k = 0..=kmax` (entry 0 is `log |x0|`), plus the
/// last normalized iterate. Entries become `-inf` once an iterate vanishes.
fn growth_logs(map: &MapDescriptor, cone: &Cone, x0: &Point, kmax: usize) -> Result<(Vec<f64>, Point)> {
    let s0 = x0.norm();
    let mut logs = Vec::with_capacity(kmax + 1);
    logs.push(s0.ln());
    let mut acc = LogSum::default();
    acc.add(s0.ln());
    let mut x = x0.scaled(1.0 / s0);
    for _ in 0..kmax {
        let y = map.apply_in(cone, &x)?;
        let s = y.norm();
        if s == 0.0 {
            logs.resize(kmax + 1, f64::NEG_INFINITY);
            return Ok((logs, x));
        }
        acc.add(s.ln());
        logs.push(acc.total());
        x = y.scaled(1.0 / s);
    }
    Ok((logs, x))
}

/// `log |T^m x0|` in the continuum for a composition operator `c T_phi`:
/// `T^m x0 (1) = x0(phi^m(1))` with `x0` the piecewise-linear interpolant.
fn composition_logs(factor: f64, inner: &InnerMap, x0: &Point, kmax: usize) -> Vec<f64> {
    let v = x0.data();
    let n = v.len() - 1;
    let nf = n as f64;
    let log_c = factor.ln();
    let mut logs = vec![v[n].ln()];
    for (m, lp) in inner.log_orbit(kmax).into_iter().enumerate() {
        let p = lp.exp();
        let val = if p * nf >= 1.0 {
            crate::maps::compose_value(v, p).ln()
        } else if v[1] > 0.0 {
            lp + (nf * v[1]).ln()
        } else {
            f64::NEG_INFINITY
        };
        logs.push(val + (m + 1) as f64 * log_c);
    }
    logs
}

fn tail_slope(logs: &[f64]) -> f64 {
    let k = logs.len() - 1;
    let h = k / 2;
    let (a, b) = (logs[h], logs[k]);
    if b == f64::NEG_INFINITY || a == f64::NEG_INFINITY {
        return 0.0;
    }
    ((b - a) / (k - h) as f64).exp()
}

/// `limsup |f^k(x0)|^{1/k}` estimated from the slope of `log |f^k(x0)|`
/// over the second half of `kmax` steps.
pub fn local_growth(map: &MapDescriptor, cone: &Cone, x0: &Point, kmax: usize) -> Result<f64> {
    if kmax < 4 {
        return input(format!("kmax must be at least 4, got {kmax}"));
    }
    cone.check_point(x0)?;
    if x0.is_zero() || !cone.contains(x0, DEFAULT_TOL)? {
        return input("start must be a nonzero point of the cone");
    }
    if let (Some((c, inner)), Cone::GridConvex { .. }) = (map.composition_inner(), cone) {
        return Ok(tail_slope(&composition_logs(c, inner, x0, kmax)));
    }
    Ok(tail_slope(&growth_logs(map, cone, x0, kmax)?.0))
}

fn require_member(cone: &Cone, v: &Point) -> Result<()> {
    cone.check_point(v)?;
    if v.is_zero() {
        return input("certificate point must be nonzero");
    }
    if !cone.contains(v, DEFAULT_TOL)? {
        return input("certificate point is not in the cone");
    }
    Ok(())
}

/// Largest `a` with `a v <= f(v)`; a lower bound for the cone spectral radius.
pub fn cw_lower(map: &MapDescriptor, cone: &Cone, v: &Point) -> Result<f64> {
    require_member(cone, v)?;
    let fv = map.apply_in(cone, v)?;
    cone.lower_ratio(&fv, v)
}

/// Smallest `mu` with `f(y) <= mu y` for interior `y`; bounds every eigenvalue.
pub fn cw_upper(map: &MapDescriptor, cone: &Cone, y: &Point) -> Result<f64> {
    cone.check_point(y)?;
    if !cone.is_interior(y, DEFAULT_TOL)? {
        return input("upper certificate needs an interior point");
    }
    let fy = map.apply_in(cone, y)?;
    Ok(cone.upper_ratio(&fy, y)?.value())
}

fn polyhedral_part(cone: &Cone, x: &Point) -> Option<PartSignature> {
    cone.as_polyhedral().and_then(|p| part_of(&p, x, PART_TOL).ok())
}

/// Normalized power iteration `x <- f(x)/|f(x)|`. Converges when consecutive
/// iterates are within `tol` (Thompson metric, or norm when the metric is
/// infinite) and the residual is at most `tol (1 + lambda)`.
pub fn eigen_iterate(map: &MapDescriptor, cone: &Cone, x0: &Point, tol: f64, maxit: usize) -> Result<Option<EigenPair>> {
    require_member(cone, x0)?;
    let mut x = x0.normalized().expect("nonzero start");
    let mut fx = map.apply_in(cone, &x)?;
    for _ in 0..maxit {
        let lambda = fx.norm();
        if lambda == 0.0 {
            return Ok(None);
        }
        let next = fx.scaled(1.0 / lambda);
        let step_norm = next.distance(&x);
        let step = if step_norm < tol { step_norm } else { cone.thompson_distance(&next, &x)?.min(step_norm) };
        let f_next = map.apply_in(cone, &next)?;
        let value = f_next.norm();
        let residual = f_next.distance(&next.scaled(value));
        if step < tol && residual <= tol * (1.0 + value) {
            if value == 0.0 {
                return Ok(None);
            }
            let part = polyhedral_part(cone, &next);
            return Ok(Some(EigenPair { vector: next, value, residual, part }));
        }
        x = next;
        fx = f_next;
    }
    Ok(None)
}

fn analytic_composition(factor: f64, inner: &InnerMap, kmax: usize) -> RadiusEstimate {
    let log_c = factor.ln();
    let norm_trace: Vec<TracePoint> = inner
        .log_orbit(kmax)
        .into_iter()
        .enumerate()
        .map(|(i, l)| {
            let k = i + 1;
            TracePoint { k, log_norm_per_k: l / k as f64 + log_c }
        })
        .collect();
    let best = norm_trace.iter().map(|t| t.log_norm_per_k).fold(f64::INFINITY, f64::min);
    let mut upper = best.exp();
    let lower = factor * inner.slope_at_zero();
    if lower > upper && lower - upper <= 1e-12 * lower {
        upper = lower;
    }
    RadiusEstimate {
        lower,
        upper,
        value: upper,
        norm_trace,
        samples: 0,
        method: "analytic".into(),
        diagnostics: vec![
            "continuum norms |T^m| = phi^m(1) attained at g(t) = t; lower bound phi'(0+)".into(),
        ],
    }
}

/// Estimate of the Bonsall cone spectral radius `lim |f^k|^{1/k}` with
/// certified bounds. Composition operators on grid cones use the exact
/// continuum norms; everything else samples starts on the unit sphere.
pub fn bonsall_radius(map: &MapDescriptor, cone: &Cone, params: &RadiusParams) -> Result<RadiusEstimate> {
    if params.kmax < 4 {
        return input(format!("kmax must be at least 4, got {}", params.kmax));
    }
    if let (Some((c, inner)), Cone::GridConvex { .. }) = (map.composition_inner(), cone) {
        return Ok(analytic_composition(c, inner, params.kmax));
    }
    let mut starts = cone.extreme_probes();
    starts.extend((0..params.samples).map(|i| {
        cone.sample_unit_seeded(params.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64))
    }));
    let runs: Vec<(Vec<f64>, Point)> = starts
        .par_iter()
        .map(|x| growth_logs(map, cone, x, params.kmax))
        .collect::<Result<_>>()?;

    let norm_trace: Vec<TracePoint> = (1..=params.kmax)
        .map(|k| TracePoint {
            k,
            log_norm_per_k: runs.iter().map(|(l, _)| l[k]).fold(f64::NEG_INFINITY, f64::max) / k as f64,
        })
        .collect();
    let growth: Vec<f64> = runs.iter().map(|(l, _)| tail_slope(l)).collect();
    let (best, sampled) = growth
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, g)| if *g > acc.1 { (i, *g) } else { acc });

    let mut diagnostics = vec![format!("sampled sup over {} starts", starts.len())];
    let eig = eigen_iterate(map, cone, &runs[best].1, params.tol, params.maxit).unwrap_or(None);
    match &eig {
        Some(p) => diagnostics.push(format!("eigen iteration converged: value {:e}, residual {:e}", p.value, p.residual)),
        None => diagnostics.push("eigen iteration did not converge".into()),
    }

    let mut lower = 0.0f64;
    let mut cert_points: Vec<&Point> = runs.iter().map(|(_, x)| x).collect();
    if let Some(p) = &eig {
        cert_points.push(&p.vector);
    }
    for v in &cert_points {
        if let Ok(a) = cw_lower(map, cone, v) {
            lower = lower.max(a);
        }
    }
    let mut upper = f64::INFINITY;
    let interior = cone.interior_point();
    for y in std::iter::once(&interior).chain(cert_points.iter().copied()) {
        if let Ok(m) = cw_upper(map, cone, y) {
            upper = upper.min(m);
        }
    }
    if upper.is_infinite() {
        diagnostics.push("no admissible interior point for the upper certificate".into());
    }
    let raw = sampled.max(eig.as_ref().map_or(0.0, |p| p.value));
    let value = raw.max(lower).min(upper.max(lower));
    Ok(RadiusEstimate { lower, upper, value, norm_trace, samples: starts.len(), method: "sampled".into(), diagnostics })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanParams {
    /// Random in-part starts per part, besides the witness.
    pub extra_samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub maxit: usize,
}

impl Default for ScanParams {
    fn default() -> Self {
        ScanParams { extra_samples: 4, seed: 42, tol: 1e-12, maxit: 5000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSummary {
    /// Accepted eigenpairs, one per (part, eigenvalue), sorted by part then value.
    pub pairs: Vec<EigenPair>,
    pub distinct_values: Vec<f64>,
    pub distinct_count: usize,
    /// Number of parts `m`, counting `{0}`.
    pub parts: usize,
    /// `distinct_count <= m - 1`.
    pub within_bound: bool,
    /// Some part carries more than one eigenvalue.
    pub continuum_suspected: bool,
    /// Runs that converged in a different part than they started in.
    pub escapes: usize,
    pub nonconverged: usize,
}

fn in_part_start(lattice: &PartsLattice, q: PartSignature, seed: u64, j: usize) -> Point {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ (u64::from(q.mask()) << 32));
    rng.set_stream(j as u64 + 1);
    let w = lattice.witness(q).expect("part exists");
    let mut x = w.scaled(rng.gen_range(0.5..1.5));
    for p in lattice.nonzero_parts() {
        if p.signature != q && p.signature.is_subset(q) {
            x = x.axpy(rng.gen_range(0.0..1.0), &p.witness);
        }
    }
    x
}

fn push_distinct(values: &mut Vec<f64>, v: f64) {
    if !values.iter().any(|u| (u - v).abs() <= SAME_VALUE_REL * (1.0 + u.abs())) {
        values.push(v);
    }
}

/// Run the eigen iteration from every part's witness and random in-part
/// points, keeping pairs that stay in their launch part.
pub fn spectrum_scan(map: &MapDescriptor, cone: &Cone, lattice: &PartsLattice, params: &ScanParams) -> Result<SpectrumSummary> {
    if cone.as_polyhedral().is_none() {
        return Err(ConeError::Capability(format!("spectrum scan needs a polyhedral cone, got {}", cone.name())));
    }
    let mut jobs: Vec<(PartSignature, Point)> = Vec::new();
    for p in lattice.nonzero_parts() {
        jobs.push((p.signature, p.witness.clone()));
        for j in 0..params.extra_samples {
            jobs.push((p.signature, in_part_start(lattice, p.signature, params.seed, j)));
        }
    }
    let results: Vec<(PartSignature, Option<EigenPair>)> = jobs
        .par_iter()
        .map(|(sig, x)| Ok((*sig, eigen_iterate(map, cone, x, params.tol, params.maxit)?)))
        .collect::<Result<_>>()?;

    let mut escapes = 0;
    let mut nonconverged = 0;
    let mut pairs: Vec<EigenPair> = Vec::new();
    let mut continuum_suspected = false;
    for (sig, res) in results {
        let Some(mut pair) = res else {
            nonconverged += 1;
            continue;
        };
        if pair.part != Some(sig) {
            escapes += 1;
            continue;
        }
        pair.part = Some(sig);
        let same_part: Vec<&EigenPair> = pairs.iter().filter(|p| p.part == Some(sig)).collect();
        if same_part.iter().any(|p| (p.value - pair.value).abs() <= SAME_VALUE_REL * (1.0 + p.value.abs())) {
            continue;
        }
        if !same_part.is_empty() {
            continuum_suspected = true;
        }
        pairs.push(pair);
    }
    pairs.sort_by(|a, b| {
        (a.part.map(|p| (p.len(), p.mask())), a.value)
            .partial_cmp(&(b.part.map(|p| (p.len(), p.mask())), b.value))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut distinct_values = Vec::new();
    for p in &pairs {
        push_distinct(&mut distinct_values, p.value);
    }
    distinct_values.sort_by(f64::total_cmp);
    let m = lattice.len();
    Ok(SpectrumSummary {
        distinct_count: distinct_values.len(),
        within_bound: distinct_values.len() < m,
        distinct_values,
        pairs,
        parts: m,
        continuum_suspected,
        escapes,
        nonconverged,
    })
}
