//! End-to-end acceptance gate. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::time::Instant;

use conespec::continuity::{map_distance, perturbation_run, reproduce_halving_discontinuity, PerturbParams};
use conespec::maps::{
    build_lattice_map, build_power_mean_map, build_lorentz_series_map, check_homogeneous, check_order_preserving, preset,
    psd_x_alpha, psd_z_theta, InnerMap, PresetOptions, PRESET_NAMES,
};
use conespec::spectral::{bonsall_radius, cw_lower, cw_upper, spectrum_scan, ScanParams};
use conespec::{enumerate_parts, part_of, Cone, MapDescriptor, PartSignature, Point, PolyhedralCone, RadiusParams, Verdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

/// Independent oracle for `phi_k(1)`: `2^-2k + eps_k (1 - 2^-k)`.
fn oracle_phi_k_at_1(k: u32) -> f64 {
    let b = 1.0 / (1u64 << k) as f64;
    let eps = 0.5 * (1.0 - 1.0 / (((1u64 << k) - 1) as f64));
    b * b + eps * (1.0 - b)
}

fn discontinuity() -> Outcome {
    let ks: Vec<u32> = (3..=8).collect();
    let rep = reproduce_halving_discontinuity(&ks, 1024, 32, 42).map_err(|e| e.to_string())?;
    let base = &rep.base_radius;
    ensure(
        (base.value - 0.5).abs() <= 1e-12 && (base.lower - 0.5).abs() <= 1e-12 && (base.upper - 0.5).abs() <= 1e-12,
        format!("r(T) = {} in [{}, {}]", base.value, base.lower, base.upper),
    )?;
    let mut prev = f64::INFINITY;
    let mut worst = 0.0f64;
    for row in &rep.rows {
        ensure(row.radius.value <= 1e-6, format!("k={} radius {}", row.k, row.radius.value))?;
        worst = worst.max(row.radius.value);
        let hi = 2.0 * (0.5 - oracle_phi_k_at_1(row.k));
        ensure((row.bracket.1 - hi).abs() <= 1e-15, format!("k={} bracket {} vs oracle {}", row.k, row.bracket.1, hi))?;
        ensure(row.bracket.1 < prev, format!("bracket not decreasing at k={}", row.k))?;
        ensure(row.sampled_distance <= row.bracket.1 && row.sampled_distance >= row.bracket.0 - 1e-15, "sampled distance outside bracket")?;
        prev = row.bracket.1;
    }
    ensure(rep.rows[0].bracket.1 <= 7.0 / 32.0 + 1e-15, "k=3 bracket above 7/32")?;
    ensure(rep.perturbation.verdict == Verdict::UpperSemicontinuousOnly, format!("verdict {:?}", rep.perturbation.verdict))?;
    Ok(format!("r(T)=0.5, max r(T_k)={worst:.1e}, bracket(3)=[{}, {}], verdict upper-semicontinuous-only", rep.rows[0].bracket.0, rep.rows[0].bracket.1))
}

fn eigen_family() -> Outcome {
    let rep = reproduce_halving_discontinuity(&[3], 1024, 8, 1).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for e in &rep.eigen_family {
        // independent evaluation of T(t^a) at the grid nodes
        let n = 1024;
        let t = MapDescriptor::Composition { inner: InnerMap::Halving };
        let g = Point::grid_from_fn(n, |s| s.powf(e.alpha));
        let tg = t.apply(&g).map_err(|e| e.to_string())?;
        let err = (0..=n)
            .map(|j| (tg.data()[j] - (0.5f64).powf(e.alpha) * (j as f64 / n as f64).powf(e.alpha)).abs())
            .fold(0.0, f64::max);
        ensure(err <= 4.0 / 1024.0 && e.ok, format!("alpha={} error {err}", e.alpha))?;
        worst = worst.max(err);
    }
    Ok(format!("alpha in {{1,2,4,8}}, max error {worst:.2e} <= {:.2e}", 4.0 / 1024.0))
}

fn lattice_spectrum() -> Outcome {
    let built = build_lattice_map(4, None).map_err(|e| e.to_string())?;
    let MapDescriptor::Lattice { lambdas, .. } = &built.map else { return Err("not a lattice map".into()) };
    let cone = Cone::orthant(4);
    let lattice = enumerate_parts(&PolyhedralCone::orthant(4)).map_err(|e| e.to_string())?;
    let s = spectrum_scan(&built.map, &cone, &lattice, &ScanParams::default()).map_err(|e| e.to_string())?;
    ensure(lattice.len() == 16, format!("{} parts", lattice.len()))?;
    ensure(s.pairs.len() == 15, format!("{} eigenpairs", s.pairs.len()))?;
    ensure(s.distinct_count == 15 && s.distinct_count == lattice.len() - 1, "distinct count")?;
    let mut worst_res = 0.0f64;
    for p in &s.pairs {
        let sig = p.part.ok_or("pair without part")?;
        let expect = lambdas[sig.mask() as usize - 1];
        ensure((p.value - expect).abs() <= 1e-14 * expect, format!("part {sig}: {} vs {expect}", p.value))?;
        ensure(p.residual < 1e-12, format!("residual {}", p.residual))?;
        worst_res = worst_res.max(p.residual);
    }
    Ok(format!("15 eigenpairs = 2^4 - 1 = m - 1, values match lambda_I, max residual {worst_res:.1e}"))
}

fn power_mean_square() -> Outcome {
    let lattice = enumerate_parts(&PolyhedralCone::square()).map_err(|e| e.to_string())?;
    ensure(lattice.len() == 10, "square cone parts")?;
    let built = build_power_mean_map(&lattice, -1.0, None, None).map_err(|e| e.to_string())?;
    ensure(built.pairs.len() == 9, format!("{} pairs", built.pairs.len()))?;
    let vals: Vec<f64> = built.pairs.iter().map(|p| p.value).collect();
    let mut gap = f64::INFINITY;
    for i in 0..vals.len() {
        for j in i + 1..vals.len() {
            gap = gap.min((vals[i] - vals[j]).abs());
        }
    }
    ensure(gap > 1e-6, format!("min gap {gap}"))?;
    let worst = built.pairs.iter().map(|p| p.residual).fold(0.0, f64::max);
    ensure(worst < 1e-9, format!("residual {worst}"))?;
    // independent residual check through apply
    for p in &built.pairs {
        let r = built.map.apply(&p.vector).map_err(|e| e.to_string())?.distance(&p.vector.scaled(p.value));
        ensure(r < 1e-9, "apply residual")?;
    }
    let s = spectrum_scan(&built.map, &Cone::square(), &lattice, &ScanParams::default()).map_err(|e| e.to_string())?;
    for v in &vals {
        ensure(s.distinct_values.iter().any(|u| (u - v).abs() <= 1e-6), format!("scan missed {v}"))?;
    }
    ensure(s.distinct_count == 9, format!("scan found {} values", s.distinct_count))?;
    Ok(format!("9 eigenpairs, min gap {gap:.3}, max residual {worst:.1e}, scan recovers all 9"))
}

fn lorentz_series() -> Outcome {
    let k = 20;
    let built = build_lorentz_series_map(k, None, None).map_err(|e| e.to_string())?;
    ensure(built.pairs.len() == k, "pair count")?;
    let worst = built.pairs.iter().map(|p| p.residual).fold(0.0, f64::max);
    ensure(worst < 1e-12, format!("residual {worst}"))?;
    let mut vals: Vec<f64> = built.pairs.iter().map(|p| p.value).collect();
    vals.sort_by(f64::total_cmp);
    ensure(vals.windows(2).all(|w| w[0] < w[1]) && vals[0] > 0.0, "eigenvalues not distinct")?;
    // cross terms 2^-j lambda_j min_{m != j} phi_m(x^q) vanish for j != q
    let angles: Vec<f64> = (1..=k).map(|j| 1.0 / j as f64).collect();
    let phi = |m: usize, x: &[f64]| {
        let t = if m == 0 { 0.0 } else { angles[m - 1] };
        x[0] * t.cos() + x[1] * t.sin() + x[2]
    };
    let mut worst_cross = 0.0f64;
    for q in 1..=k {
        let t = angles[q - 1];
        let s = 0.5f64.sqrt();
        let xq = [-t.cos() * s, -t.sin() * s, s];
        for j in (1..=k).filter(|&j| j != q) {
            let m = (0..=k).filter(|&m| m != j).map(|m| phi(m, &xq)).fold(f64::INFINITY, f64::min);
            let term = (0.5f64).powi(j as i32) * m.max(0.0);
            worst_cross = worst_cross.max(term);
        }
    }
    ensure(worst_cross <= 1e-15, format!("cross term {worst_cross}"))?;
    Ok(format!("20 distinct eigenvalues, max residual {worst:.1e}, max cross term {worst_cross:.1e}"))
}

fn psd_example() -> Outcome {
    let n = 3;
    let (f, cone) = preset("paper:psd-f", &PresetOptions { n: Some(n), ..Default::default() }).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for i in 0..41 {
        let theta = PI * i as f64 / 40.0;
        let z = psd_z_theta(n, theta);
        let r = f.apply(&z).map_err(|e| e.to_string())?.distance(&z.scaled(theta.cos().abs()));
        worst = worst.max(r);
    }
    ensure(worst < 1e-8, format!("Z_theta residual {worst}"))?;
    let x1 = psd_x_alpha(n, 1.0);
    let fx = f.apply(&x1).map_err(|e| e.to_string())?;
    ensure(fx.distance(&x1) <= 1e-10, "f(X_1) != X_1")?;
    let up = cw_upper(&f, &cone, &x1).map_err(|e| e.to_string())?;
    ensure((up - 1.0).abs() <= 1e-10, format!("upper certificate {up}"))?;
    Ok(format!("41 angles, max residual {worst:.1e}; f(X_1)=X_1; upper certificate at X_1 = {up}"))
}

/// Maps for the certificate and property suites, with their cones.
fn families(rng: &mut ChaCha8Rng) -> Vec<(String, MapDescriptor, Cone)> {
    let mut out = Vec::new();
    let small = PresetOptions { grid: Some(256), n: Some(3), ..Default::default() };
    for name in ["paper:T", "paper:psd-f", "paper:psd-g", "paper:lattice", "paper:thm55", "paper:thm56", "zero"] {
        let (m, c) = preset(name, &small).expect("preset");
        out.push((name.to_string(), m, c));
    }
    let o3 = Cone::orthant(3);
    let lat = enumerate_parts(&PolyhedralCone::orthant(3)).unwrap();
    out.push(("power-mean map on orthant(3), r=-inf".into(), build_power_mean_map(&lat, f64::NEG_INFINITY, None, None).unwrap().map, o3.clone()));
    for i in 0..4 {
        let matrix: Vec<Vec<f64>> = (0..3).map(|_| (0..3).map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..2.0) }).collect()).collect();
        out.push((format!("random nonnegative linear #{i}"), MapDescriptor::Linear { matrix }, o3.clone()));
    }
    let (a, s) = (0.7f64, 1.3);
    let rot = MapDescriptor::Linear {
        matrix: vec![vec![s * a.cos(), -s * a.sin(), 0.0], vec![s * a.sin(), s * a.cos(), 0.0], vec![0.0, 0.0, 1.5]],
    };
    out.push(("scaled rotation on lorentz(3)".into(), rot, Cone::lorentz(3)));
    let lattice_plus = MapDescriptor::Sum {
        maps: vec![build_lattice_map(3, None).unwrap().map, MapDescriptor::diagonal(&[0.1, 0.2, 0.3])],
    };
    out.push(("lattice plus diagonal".into(), lattice_plus, o3));
    out
}

fn sandwich() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let fams = families(&mut rng);
    let params = RadiusParams::default();
    let radii: Vec<_> = fams.iter().map(|(_, m, c)| bonsall_radius(m, c, &params)).collect();
    let mut checked = 0;
    let mut worst_low = f64::NEG_INFINITY;
    let mut worst_up = f64::NEG_INFINITY;
    for t in 0..500 {
        let i = t % fams.len();
        let (name, map, cone) = &fams[i];
        let r = radii[i].as_ref().map_err(|e| format!("{name}: {e}"))?;
        ensure(r.lower <= r.value && r.value <= r.upper + 1e-8, format!("{name}: estimate not sandwiched {r:?}"))?;
        let v = cone.sample_unit(&mut rng);
        let y = cone.sample_unit(&mut rng).add(&cone.interior_point());
        let lo = cw_lower(map, cone, &v).map_err(|e| format!("{name}: {e}"))?;
        let up = cw_upper(map, cone, &y).map_err(|e| format!("{name}: {e}"))?;
        worst_low = worst_low.max(lo - r.value);
        worst_up = worst_up.max(r.value - up);
        ensure(lo <= r.value + 1e-12 * (1.0 + r.value), format!("{name}: lower certificate {lo} above value {}", r.value))?;
        ensure(r.value <= up + 1e-8, format!("{name}: value {} above upper certificate {up}", r.value))?;
        checked += 1;
    }
    Ok(format!("{checked} triples over {} maps; max(lower - value) = {worst_low:.1e}, max(value - upper) = {worst_up:.1e}", fams.len()))
}

fn properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut fams = families(&mut rng);
    let (tk, g) = preset("paper:Tk", &PresetOptions { k: Some(3), ..Default::default() }).unwrap();
    fams.push(("paper:Tk".into(), tk, g));
    let (t, g) = preset("paper:T", &PresetOptions::default()).unwrap();
    fams.push(("paper:T on 1024 grid".into(), t, g));
    let mut names = BTreeSet::new();
    for (name, map, cone) in &fams {
        let o = check_order_preserving(map, cone, 1000, 3, 1e-8);
        let h = check_homogeneous(map, cone, 1000, 5, 1e-8);
        ensure(o.violations == 0, format!("{name}: {} order violations (worst {:e})", o.violations, o.worst_margin))?;
        ensure(h.violations == 0, format!("{name}: {} homogeneity violations (worst {:e})", h.violations, h.worst_margin))?;
        names.insert(name.clone());
    }
    for p in PRESET_NAMES {
        ensure(names.iter().any(|n| n.starts_with(p)), format!("preset {p} not covered"))?;
    }
    let bad = MapDescriptor::Linear { matrix: vec![vec![1.0, -0.5, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]] };
    let c = check_order_preserving(&bad, &Cone::orthant(3), 1000, 3, 1e-8);
    ensure(c.violations >= 1, "negative-entry control passed")?;
    Ok(format!("{} maps x 1000 trials: 0 violations; negative-entry control: {} violations", fams.len(), c.violations))
}

fn thompson_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst = f64::INFINITY;
    for cone in [Cone::orthant(5), Cone::lorentz(3)] {
        let n = cone.dim();
        for _ in 0..1000 {
            let x = cone.sample_unit(&mut rng).add(&cone.interior_point().scaled(rng.gen_range(0.05..1.0)));
            let r = cone.boundary_distance(&x).map_err(|e| e.to_string())?;
            let dir: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let u = Point::vector(dir).normalized().unwrap();
            let delta = rng.gen_range(0.0..0.999) * r;
            let y = x.axpy(delta, &u);
            let d = cone.thompson_distance(&x, &y).map_err(|e| e.to_string())?;
            let bound = ((r + delta) / r).max(r / (r - delta)).ln();
            worst = worst.min(bound - d);
            ensure(bound - d >= -1e-10, format!("{}: d={d} bound={bound}", cone.name()))?;
        }
    }
    Ok(format!("2000 interior pairs, min slack {worst:.1e}"))
}

fn parts_lattice() -> Outcome {
    let mut cones: Vec<(String, PolyhedralCone, usize)> =
        (1..=5).map(|n| (format!("orthant({n})"), PolyhedralCone::orthant(n), 1usize << n)).collect();
    cones.push(("square".into(), PolyhedralCone::square(), 10));
    let mut pairs = 0;
    for (name, poly, expect) in &cones {
        let l = enumerate_parts(poly).map_err(|e| e.to_string())?;
        ensure(l.len() == *expect, format!("{name}: {} parts, expected {expect}", l.len()))?;
        let cone = Cone::Polyhedral(poly.clone());
        for p in l.parts() {
            let sig = part_of(poly, &p.witness, conespec::parts::PART_TOL).map_err(|e| e.to_string())?;
            ensure(sig == p.signature, format!("{name}: witness of {} lies in {sig}", p.signature))?;
        }
        for p in l.parts() {
            for q in l.parts() {
                let m = cone.upper_ratio(&p.witness, &q.witness).map_err(|e| e.to_string())?;
                let dominated = m.is_finite();
                ensure(dominated == p.signature.is_subset(q.signature), format!("{name}: {} vs {}", p.signature, q.signature))?;
                pairs += 1;
            }
        }
    }
    let _ = PartSignature::EMPTY;
    Ok(format!("orthant(1..5) give 2^n parts, square gives 10; {pairs} ordered pairs agree with signature inclusion"))
}

fn upper_semicontinuity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let fams = families(&mut rng);
    let usable: Vec<_> = fams.into_iter().filter(|(n, _, c)| !matches!(c, Cone::GridConvex { .. }) && n != "zero").collect();
    let params = PerturbParams { radius: RadiusParams { samples: 32, ..RadiusParams::default() }, distance_samples: 32, ..PerturbParams::default() };
    let mut worst = f64::NEG_INFINITY;
    for i in 0..20 {
        let (name, base, cone) = &usable[i % usable.len()];
        let len = cone.zero().data().len();
        let family: Vec<(u64, MapDescriptor)> = (1..=3u64)
            .map(|k| {
                let s = 10f64.powi(-(k as i32) - 5) * rng.gen_range(0.5..1.0);
                let fk = if i % 2 == 0 {
                    base.clone().scaled(1.0 - s)
                } else {
                    // identity keeps every cone here invariant; nonnegative off-diagonal mass only on orthants
                    let mut e = vec![vec![0.0; len]; len];
                    for (r, row) in e.iter_mut().enumerate() {
                        row[r] = s;
                        if matches!(cone, Cone::Orthant { .. }) {
                            for v in row.iter_mut() {
                                *v += s * rng.gen_range(0.0..1.0);
                            }
                        }
                    }
                    MapDescriptor::Sum { maps: vec![base.clone(), MapDescriptor::Linear { matrix: e }] }
                };
                (k, fk)
            })
            .collect();
        let rep = perturbation_run(base, &family, cone, &params).map_err(|e| format!("{name}: {e}"))?;
        let r = rep.base_radius.value;
        for row in &rep.rows {
            let d = map_distance(base, &family[(row.k - 1) as usize].1, cone, 16, 3).map_err(|e| e.to_string())?;
            ensure(d.sampled < 1e-3, format!("{name}: distance {} not below 1e-3", d.sampled))?;
            worst = worst.max(row.radius.value - r - 1e-4 * (1.0 + r));
            ensure(row.radius.value <= r + 1e-4 * (1.0 + r), format!("{name} family {i}: r_k {} vs r {r}", row.radius.value))?;
        }
    }
    Ok(format!("20 families, max (r_k - r - 1e-4(1+r)) = {worst:.2e}"))
}

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("grid-cone discontinuity of the spectral radius", discontinuity),
        ("eigenfunctions t^a of the halving operator", eigen_family),
        ("lattice map spectrum on orthant(4)", lattice_spectrum),
        ("one eigenvalue per part on the square cone", power_mean_square),
        ("Lorentz series with 20 eigenvalues", lorentz_series),
        ("PSD trace map eigenvectors", psd_example),
        ("certificate sandwich", sandwich),
        ("order preservation and homogeneity", properties),
        ("Thompson metric versus norm distance", thompson_bound),
        ("parts lattice", parts_lattice),
        ("upper semicontinuity under perturbation", upper_semicontinuity),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(msg) => println!("PASS {:>2} {name} ({secs:.2}s): {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.2}s): {msg}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
