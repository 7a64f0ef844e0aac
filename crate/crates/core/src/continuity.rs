//! Map distances, perturbation families and continuity verdicts for the cone
//! spectral radius, plus the grid-cone discontinuity example end to end.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cone::Cone;
use crate::error::{input, ConeError, Result};
use crate::maps::{eps_k, phi_k_eval, InnerMap, MapDescriptor};
use crate::point::Point;
use crate::spectral::{bonsall_radius, RadiusEstimate, RadiusParams, TracePoint};

/// Longest sequence `condition_g_probe` will scan.
pub const MAX_SEQUENCE: usize = 1_000_000;
/// Relative slack for the domination test: rounding only.
const ULP_TOL: f64 = 8.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceEstimate {
    /// Sup of `|f(x) - g(x)|` over the sampled unit points (a lower estimate).
    pub sampled: f64,
    /// Proven lower and upper bounds, when known for the pair.
    pub bracket: Option<(f64, f64)>,
    /// Upper bound from a closed form (bracket, or Frobenius norm for linear pairs).
    #[serde(with = "crate::json::extended")]
    pub upper: f64,
    pub samples: usize,
}

/// `max_t (t/2 - phi(t))` when `phi <= t/2` on `[0,1]`, for `(T, T_phi)` pairs.
fn halving_gap(f: &MapDescriptor, g: &MapDescriptor) -> Option<f64> {
    let (MapDescriptor::Composition { inner: a }, MapDescriptor::Composition { inner: b }) = (f, g) else {
        return None;
    };
    let other = match (a, b) {
        (InnerMap::Halving, o) | (o, InnerMap::Halving) => o,
        _ => return None,
    };
    let below = match other {
        InnerMap::Halving => true,
        InnerMap::PhiK { .. } => true,
        InnerMap::PiecewiseLinear { breakpoints } => breakpoints.iter().all(|p| p[1] <= 0.5 * p[0]),
    };
    below.then(|| other.gap_to_halving())
}

fn frobenius_gap(f: &MapDescriptor, g: &MapDescriptor) -> Option<f64> {
    let (MapDescriptor::Linear { matrix: a }, MapDescriptor::Linear { matrix: b }) = (f, g) else {
        return None;
    };
    if a.len() != b.len() {
        return None;
    }
    let s: f64 = a.iter().zip(b).flat_map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| (x - y) * (x - y))).sum();
    Some(s.sqrt())
}

/// Sampled estimate of `|f - g|_C = sup { |f(x) - g(x)| : x in C, |x| = 1 }`.
pub fn map_distance(f: &MapDescriptor, g: &MapDescriptor, cone: &Cone, samples: usize, seed: u64) -> Result<DistanceEstimate> {
    let mut probes = Vec::new();
    if let Cone::GridConvex { dim } = cone {
        probes.push(Point::grid_from_fn(*dim, |t| t));
    }
    probes.extend(cone.extreme_probes());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        probes.push(cone.sample_unit(&mut rng));
    }
    let diffs: Vec<f64> = probes
        .par_iter()
        .map(|x| Ok(f.apply_in(cone, x)?.distance(&g.apply_in(cone, x)?)))
        .collect::<Result<_>>()?;
    let sampled = diffs.into_iter().fold(0.0, f64::max);
    let bracket = match cone {
        Cone::GridConvex { .. } => halving_gap(f, g).map(|gap| (gap, 2.0 * gap)),
        _ => None,
    };
    let upper = bracket.map(|b| b.1).or_else(|| frobenius_gap(f, g)).unwrap_or(f64::INFINITY);
    Ok(DistanceEstimate { sampled, bracket, upper, samples: probes.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    ContinuousConsistent,
    UpperSemicontinuousOnly,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbRow {
    pub k: u64,
    pub distance: DistanceEstimate,
    pub radius: RadiusEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationReport {
    pub base_radius: RadiusEstimate,
    pub rows: Vec<PerturbRow>,
    pub sigma_sample: f64,
    pub verdict: Verdict,
    /// "analytic" when every row has a closed-form distance bracket, else "sampled".
    pub distance_source: String,
}

impl PerturbationReport {
    /// Flat CSV with columns `k, dist_lo, dist_hi, dist_sampled, r_k, r_k_lower, r_k_upper`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| ConeError::Input(format!("csv output failed: {e}"));
        out.write_record(["k", "dist_lo", "dist_hi", "dist_sampled", "r_k", "r_k_lower", "r_k_upper"]).map_err(io)?;
        for r in &self.rows {
            let (lo, hi) = r.distance.bracket.unwrap_or((r.distance.sampled, r.distance.upper));
            let cells = [lo, hi, r.distance.sampled, r.radius.value, r.radius.lower, r.radius.upper];
            let mut rec = vec![r.k.to_string()];
            rec.extend(cells.iter().map(|v| format!("{v:e}")));
            out.write_record(&rec).map_err(io)?;
        }
        out.flush().map_err(|e| ConeError::Input(format!("csv output failed: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerturbParams {
    pub radius: RadiusParams,
    pub distance_samples: usize,
    pub seed: u64,
    /// Radius tolerance used by the verdict rules.
    pub tol: f64,
}

impl Default for PerturbParams {
    fn default() -> Self {
        PerturbParams { radius: RadiusParams::default(), distance_samples: 64, seed: 42, tol: 1e-6 }
    }
}

fn half_width(r: &RadiusEstimate) -> Option<f64> {
    r.upper.is_finite().then(|| 0.5 * (r.upper - r.lower).max(0.0))
}

/// Radii and distances along a family `f_k -> f`, with a verdict:
/// continuous-consistent when the last radius matches the base within
/// `max(5 tol, 3 sigma)`; upper-semicontinuous-only when every radius stays
/// below the base and more than `0.1 r` away while distances shrink.
pub fn perturbation_run(f: &MapDescriptor, family: &[(u64, MapDescriptor)], cone: &Cone, params: &PerturbParams) -> Result<PerturbationReport> {
    if family.is_empty() {
        return input("perturbation family is empty");
    }
    let base_radius = bonsall_radius(f, cone, &params.radius)?;
    let mut rows: Vec<PerturbRow> = family
        .par_iter()
        .map(|(k, fk)| {
            let distance = map_distance(f, fk, cone, params.distance_samples, params.seed ^ k)?;
            let radius = bonsall_radius(fk, cone, &params.radius)?;
            Ok(PerturbRow { k: *k, distance, radius })
        })
        .collect::<Result<_>>()?;
    rows.sort_by_key(|r| r.k);

    let last = rows.last().expect("nonempty");
    let sigma_sample = [half_width(&base_radius), half_width(&last.radius)].into_iter().flatten().fold(0.0, f64::max);
    let r = base_radius.value;
    let tol = params.tol;
    let dist = |row: &PerturbRow| if row.distance.upper.is_finite() { row.distance.upper } else { row.distance.sampled };
    let verdict = if (last.radius.value - r).abs() <= (5.0 * tol).max(3.0 * sigma_sample) {
        Verdict::ContinuousConsistent
    } else if rows.iter().all(|row| row.radius.value <= r + tol && r - row.radius.value > 0.1 * r)
        && dist(last) < dist(&rows[0])
    {
        Verdict::UpperSemicontinuousOnly
    } else {
        Verdict::Inconclusive
    };
    let distance_source = if rows.iter().all(|r| r.distance.bracket.is_some()) { "analytic" } else { "sampled" };
    Ok(PerturbationReport { base_radius, rows, sigma_sample, verdict, distance_source: distance_source.into() })
}

/// `T_k -> T` on the grid cone for the given `k`.
pub fn halving_family(k_list: &[u32]) -> Vec<(u64, MapDescriptor)> {
    k_list
        .iter()
        .map(|&k| (u64::from(k), MapDescriptor::Composition { inner: InnerMap::PhiK { k } }))
        .collect()
}

/// `diag(2,3) + 10^-j I` for `j = 1..=jmax`, converging to `diag(2,3)`.
pub fn scaled_linear_family(jmax: u32) -> (MapDescriptor, Vec<(u64, MapDescriptor)>) {
    let base = MapDescriptor::diagonal(&[2.0, 3.0]);
    let fam = (1..=jmax)
        .map(|j| {
            let e = 10f64.powi(-(j as i32));
            (u64::from(j), MapDescriptor::diagonal(&[2.0 + e, 3.0 + e]))
        })
        .collect();
    (base, fam)
}

/// `(1 - 1/k) f` for each `k`.
pub fn scaled_family(f: &MapDescriptor, ks: &[u64]) -> Vec<(u64, MapDescriptor)> {
    ks.iter().map(|&k| (k, f.clone().scaled(1.0 - 1.0 / k as f64))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscontinuityRow {
    pub k: u32,
    pub phi_k_at_1: f64,
    pub eps_k: f64,
    pub bracket: (f64, f64),
    pub sampled_distance: f64,
    pub norm_trace: Vec<TracePoint>,
    pub radius: RadiusEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenFamilyRow {
    pub alpha: f64,
    pub eigenvalue: f64,
    pub max_error: f64,
    pub bound: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscontinuityReport {
    pub grid_n: usize,
    pub base_radius: RadiusEstimate,
    pub rows: Vec<DiscontinuityRow>,
    pub eigen_family: Vec<EigenFamilyRow>,
    pub perturbation: PerturbationReport,
    pub warnings: Vec<String>,
}

/// Halving versus its quadratic-at-zero approximants on the grid cone: exact
/// radii, distance brackets, norm traces, the verdict, and the eigenfamily
/// `T(t^a) = 2^-a t^a`.
pub fn reproduce_halving_discontinuity(k_list: &[u32], grid_n: usize, m_max: usize, seed: u64) -> Result<DiscontinuityReport> {
    if k_list.is_empty() {
        return input("k list is empty");
    }
    if !grid_n.is_power_of_two() || grid_n < 2 {
        return input(format!("grid size must be a power of two, got {grid_n}"));
    }
    let mut warnings = Vec::new();
    for &k in k_list {
        phi_k_eval(k, 1.0)?;
        if (0.5f64).powi(k as i32) < 1.0 / grid_n as f64 {
            warnings.push(format!("k = {k}: breakpoint 2^-{k} is below the grid resolution 1/{grid_n}"));
        }
    }
    let cone = Cone::grid_convex(grid_n);
    let t = MapDescriptor::Composition { inner: InnerMap::Halving };
    let params = PerturbParams {
        radius: RadiusParams { kmax: m_max.max(4), seed, ..RadiusParams::default() },
        seed,
        ..PerturbParams::default()
    };
    let perturbation = perturbation_run(&t, &halving_family(k_list), &cone, &params)?;
    let rows = perturbation
        .rows
        .iter()
        .map(|row| {
            let k = row.k as u32;
            Ok(DiscontinuityRow {
                k,
                phi_k_at_1: phi_k_eval(k, 1.0)?,
                eps_k: eps_k(k),
                bracket: row.distance.bracket.expect("composition pair has a bracket"),
                sampled_distance: row.distance.sampled,
                norm_trace: row.radius.norm_trace.clone(),
                radius: row.radius.clone(),
            })
        })
        .collect::<Result<_>>()?;
    let bound = 4.0 / grid_n as f64;
    let eigen_family = [1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|&alpha| {
            let g = Point::grid_from_fn(grid_n, |s: f64| s.powf(alpha));
            let tg = t.apply(&g)?;
            let ev = (0.5f64).powf(alpha);
            let max_error = tg.data().iter().zip(g.data()).map(|(a, b)| (a - ev * b).abs()).fold(0.0, f64::max);
            Ok(EigenFamilyRow { alpha, eigenvalue: ev, max_error, bound, ok: max_error <= bound })
        })
        .collect::<Result<_>>()?;
    warnings.push("map distances are sampled sups; brackets are closed-form".into());
    Ok(DiscontinuityReport {
        grid_n,
        base_radius: perturbation.base_radius.clone(),
        rows,
        eigen_family,
        perturbation,
        warnings,
    })
}

/// Smallest `m` (1-based) such that `lambda x <= x_k` for every `k` in
/// `m..=len`, checked up to a few ulps; `None` if the last term already fails.
pub fn condition_g_probe(cone: &Cone, x: &Point, len: usize, lambda: f64, seq: impl Fn(usize) -> Point + Sync) -> Result<Option<usize>> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return input(format!("lambda must lie in (0,1), got {lambda}"));
    }
    if len == 0 || len > MAX_SEQUENCE {
        return input(format!("sequence length must lie in [1, {MAX_SEQUENCE}]"));
    }
    let lx = x.scaled(lambda);
    let fails: Vec<usize> = (1..=len)
        .into_par_iter()
        .map(|k| cone.leq(&lx, &seq(k), ULP_TOL).map(|ok| if ok { 0 } else { k }))
        .collect::<Result<_>>()?;
    let last_fail = fails.into_iter().max().unwrap_or(0);
    Ok(if last_fail == len { None } else { Some(last_fail + 1) })
}

/// `condition_g_probe` over an explicit finite sequence.
pub fn condition_g_probe_slice(cone: &Cone, x: &Point, seq: &[Point], lambda: f64) -> Result<Option<usize>> {
    condition_g_probe(cone, x, seq.len(), lambda, |k| seq[k - 1].clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t3_bracket() {
        let cone = Cone::grid_convex(1024);
        let t = MapDescriptor::Composition { inner: InnerMap::Halving };
        let t3 = MapDescriptor::Composition { inner: InnerMap::PhiK { k: 3 } };
        let d = map_distance(&t, &t3, &cone, 64, 1).unwrap();
        let (lo, hi) = d.bracket.unwrap();
        assert!((lo - 7.0 / 64.0).abs() < 1e-15 && (hi - 7.0 / 32.0).abs() < 1e-15);
        assert!(d.sampled >= lo - 1e-15 && d.sampled <= hi);
        assert_eq!(map_distance(&t, &t, &cone, 16, 1).unwrap().sampled, 0.0);
    }

    #[test]
    fn linear_distance() {
        let o = Cone::orthant(2);
        let a = MapDescriptor::diagonal(&[2.0, 3.0]);
        let b = MapDescriptor::Linear { matrix: vec![vec![2.0, 0.01], vec![0.0, 3.02]] };
        let d = map_distance(&a, &b, &o, 64, 1).unwrap();
        assert!(d.sampled > 0.0 && d.sampled <= d.upper);
        assert!(d.bracket.is_none());
    }

    #[test]
    fn verdicts() {
        let (base, fam) = scaled_linear_family(8);
        let rep = perturbation_run(&base, &fam, &Cone::orthant(2), &PerturbParams::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::ContinuousConsistent);
        assert!(rep.rows.windows(2).all(|w| w[0].k < w[1].k));
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("k,dist_lo,dist_hi,dist_sampled,r_k,r_k_lower,r_k_upper\n"));
        assert_eq!(text.lines().count(), 9);
        assert!(perturbation_run(&base, &[], &Cone::orthant(2), &PerturbParams::default()).is_err());
    }

    #[test]
    fn discontinuity_small_grid() {
        let rep = reproduce_halving_discontinuity(&[3, 4, 5], 256, 32, 7).unwrap();
        assert_eq!(rep.perturbation.verdict, Verdict::UpperSemicontinuousOnly);
        assert!((rep.base_radius.value - 0.5).abs() < 1e-12);
        assert!((rep.rows[0].phi_k_at_1 - 0.390625).abs() < 1e-16);
        assert!(rep.rows.iter().all(|r| r.radius.value < 1e-6));
        assert!(rep.eigen_family.iter().all(|e| e.ok));
        assert_eq!(rep.eigen_family[0].max_error, 0.0);
        assert!(reproduce_halving_discontinuity(&[3], 100, 32, 7).is_err());
        assert!(!reproduce_halving_discontinuity(&[9], 256, 32, 7).unwrap().warnings.is_empty());
    }

    #[test]
    fn condition_g_examples() {
        let l = Cone::lorentz(3);
        let x = Point::vector(vec![0.0, 0.0, 1.0]);
        let m = condition_g_probe(&l, &x, 1000, 0.9, |k| Point::vector(vec![1.0 / k as f64, 0.0, 1.0])).unwrap();
        assert_eq!(m, Some(10));
        let b = Point::vector(vec![1.0, 0.0, 1.0]);
        let m = condition_g_probe(&l, &b, 10_000, 0.9, |k| {
            let t = 1.0 / k as f64;
            Point::vector(vec![t.cos(), t.sin(), 1.0])
        })
        .unwrap();
        assert_eq!(m, None);
        assert_eq!(condition_g_probe_slice(&l, &x, &[x.clone(), x.clone()], 0.9).unwrap(), Some(1));
        assert!(condition_g_probe_slice(&l, &x, &[x.clone()], 1.0).is_err());
    }
}
