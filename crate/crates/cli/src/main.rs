//! `conespec` command-line front end. Every subcommand prints one JSON
//! envelope `{"config", "result", "warnings"}`.

use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use conespec::continuity::{
    perturbation_run, reproduce_halving_discontinuity, scaled_family, scaled_linear_family, PerturbParams,
};
use conespec::json::to_string_17;
use conespec::maps::{check_homogeneous, check_order_preserving, preset, psd_z_theta, PresetOptions};
use conespec::spectral::{bonsall_radius, spectrum_scan, ScanParams};
use conespec::{
    enumerate_parts, heights, Cone, ConeError, EigenPair, MapDescriptor, Point, RadiusParams, DEFAULT_GRID, DEFAULT_TOL,
};
use serde::Serialize;
use serde_json::{json, Value};

const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(name = "conespec", version, about = "Cone spectral radius and cone spectrum experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bonsall cone spectral radius with certificate bounds.
    Radius(Common),
    /// Eigenpairs per part, or analytic and sampled spectra for presets.
    Spectrum(Common),
    /// Spectral radius along a perturbation family.
    Perturb(Common),
    /// Thompson distance between two points.
    Thompson(ThompsonArgs),
    /// Parts lattice of a polyhedral cone.
    Parts(Common),
    /// Randomized order-preservation and homogeneity testers.
    Check(Common),
}

#[derive(Args, Clone, Serialize)]
struct Common {
    /// Built-in map name (`paper:T`, `paper:lattice`, ..., `zero`; `scaled-linear` for perturb).
    #[arg(long)]
    preset: Option<String>,
    /// Map descriptor: preset name, inline JSON, or path to a JSON file.
    #[arg(long)]
    map: Option<String>,
    /// Cone: `orthant:N`, `lorentz:N`, `psd:N`, `grid:N`, `square`, inline JSON or a JSON file.
    #[arg(long)]
    cone: Option<String>,
    /// `k` for `paper:Tk` and `paper:thm56`; for perturb a list `3..8` or `3,5,7`.
    #[arg(long)]
    k: Option<String>,
    /// Dimension for the lattice and PSD presets.
    #[arg(long)]
    n: Option<usize>,
    /// Grid intervals for composition operators.
    #[arg(long)]
    grid: Option<usize>,
    /// Power-mean exponent for `paper:thm55` (`-inf` and `inf` allowed).
    #[arg(long, allow_hyphen_values = true)]
    r: Option<f64>,
    /// Number of angles for the sampled PSD spectrum.
    #[arg(long)]
    theta_grid: Option<usize>,
    /// Reproduce a built-in experiment (`section3`).
    #[arg(long)]
    paper: Option<String>,
    /// Perturbation family: `scaled`, `scaled-linear`, `section3` or `empty`.
    #[arg(long)]
    family: Option<String>,
    #[arg(long, default_value_t = 64)]
    kmax: usize,
    #[arg(long, default_value_t = 64)]
    samples: usize,
    /// Trials per property tester.
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, env = "CONESPEC_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Write the JSON envelope here instead of stdout.
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
    /// Write the perturbation table as CSV.
    #[arg(long)]
    #[serde(skip)]
    csv: Option<PathBuf>,
}

#[derive(Args, Clone, Serialize)]
struct ThompsonArgs {
    /// Cone; defaults to the orthant of the point dimension.
    #[arg(long)]
    cone: Option<String>,
    /// First point as comma-separated coordinates or a JSON array.
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    #[arg(long, allow_hyphen_values = true)]
    y: String,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Envelope<'a, R: Serialize> {
    config: &'a Value,
    result: R,
    warnings: &'a [String],
}

enum Failure {
    Lib(ConeError),
    Io(String),
}

impl From<ConeError> for Failure {
    fn from(e: ConeError) -> Self {
        Failure::Lib(e)
    }
}

type Run<T> = Result<T, Failure>;

fn bad(msg: impl Into<String>) -> Failure {
    Failure::Lib(ConeError::Input(msg.into()))
}

struct Output {
    config: Value,
    result: Value,
    warnings: Vec<String>,
}

fn to_value<T: Serialize>(v: &T) -> Run<Value> {
    serde_json::to_value(v).map_err(|e| Failure::Io(e.to_string()))
}

fn read_json_arg(arg: &str) -> Run<String> {
    let t = arg.trim_start();
    if t.starts_with('{') || t.starts_with('[') {
        Ok(arg.to_string())
    } else {
        fs::read_to_string(arg).map_err(|e| bad(format!("cannot read {arg}: {e}")))
    }
}

fn parse_cone(arg: &str) -> Run<Cone> {
    if arg == "square" {
        return Ok(Cone::square());
    }
    if let Some((kind, n)) = arg.split_once(':') {
        let n: usize = n.parse().map_err(|_| bad(format!("bad cone size in {arg:?}")))?;
        let cone = match kind {
            "orthant" => Cone::orthant(n),
            "lorentz" => Cone::lorentz(n),
            "psd" => Cone::psd(n),
            "grid" | "grid_convex" => Cone::grid_convex(n),
            _ => return Err(bad(format!("unknown cone kind {kind:?}"))),
        };
        cone.validate()?;
        return Ok(cone);
    }
    let text = read_json_arg(arg)?;
    let cone: Cone = serde_json::from_str(&text).map_err(|e| bad(format!("bad cone JSON: {e}")))?;
    cone.validate()?;
    Ok(cone)
}

/// `3`, `3..8` (inclusive) or `3,5,7`.
fn parse_k_list(s: &str) -> Run<Vec<u32>> {
    let num = |t: &str| t.trim().parse::<u32>().map_err(|_| bad(format!("bad k value {t:?}")));
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
        if a > b {
            return Err(bad(format!("empty k range {s}")));
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(num).collect()
}

impl Common {
    fn k_list(&self) -> Run<Option<Vec<u32>>> {
        self.k.as_deref().map(parse_k_list).transpose()
    }

    fn cone(&self) -> Run<Option<Cone>> {
        self.cone.as_deref().map(parse_cone).transpose()
    }

    fn preset_options(&self) -> Run<PresetOptions> {
        Ok(PresetOptions {
            k: self.k_list()?.and_then(|v| v.first().copied()),
            n: self.n,
            grid: self.grid,
            cone: self.cone()?,
            r: self.r,
        })
    }

    /// Resolve `--preset` / `--map` / `--cone` into a map and its cone.
    fn map_and_cone(&self) -> Run<(MapDescriptor, Cone)> {
        let opts = self.preset_options()?;
        let (map, natural) = match (&self.preset, &self.map) {
            (Some(_), Some(_)) => return Err(bad("give either --preset or --map, not both")),
            (None, None) => return Err(bad("a map is required: use --preset or --map")),
            (Some(p), None) => preset(p, &opts)?,
            (None, Some(m)) if !m.trim_start().starts_with('{') && !m.ends_with(".json") => preset(m, &opts)?,
            (None, Some(m)) => {
                let text = read_json_arg(m)?;
                let map: MapDescriptor =
                    serde_json::from_str(&text).map_err(|e| bad(format!("bad map JSON: {e}")))?;
                map.validate()?;
                let cone = match (opts.cone.clone(), map.natural_cone()) {
                    (Some(c), _) => c,
                    (None, Some(c)) => c,
                    (None, None) => return Err(bad("this map has no natural cone: pass --cone")),
                };
                (map, cone)
            }
        };
        let cone = opts.cone.unwrap_or(natural);
        Ok((map, cone))
    }

    fn config(&self, command: &str, extra: Value) -> Run<Value> {
        let mut v = to_value(self)?;
        let obj = v.as_object_mut().expect("struct serializes to an object");
        obj.insert("command".into(), json!(command));
        if let Value::Object(m) = extra {
            obj.extend(m);
        }
        Ok(v)
    }

    fn radius_params(&self) -> RadiusParams {
        RadiusParams { kmax: self.kmax, samples: self.samples, seed: self.seed, tol: self.tol, ..RadiusParams::default() }
    }
}

fn sampling_warnings(cone: &Cone, warnings: &mut Vec<String>) {
    if let Cone::GridConvex { dim } = cone {
        warnings.push(format!("grid cone discretized with {} intervals; values are exact only at grid nodes", dim - 1));
    }
}

fn cmd_radius(a: &Common) -> Run<Output> {
    let (map, cone) = a.map_and_cone()?;
    let est = bonsall_radius(&map, &cone, &a.radius_params())?;
    let mut warnings = Vec::new();
    sampling_warnings(&cone, &mut warnings);
    if est.samples > 0 {
        warnings.push("[lower, upper] are certificates; value between them is sampled".into());
    }
    warnings.extend(est.diagnostics.iter().cloned());
    Ok(Output {
        config: a.config("radius", json!({ "resolved_map": map, "resolved_cone": cone }))?,
        result: to_value(&est)?,
        warnings,
    })
}

#[derive(Serialize)]
struct SampledEigen {
    theta: f64,
    pair: EigenPair,
}

fn cmd_spectrum(a: &Common) -> Run<Output> {
    let (map, cone) = a.map_and_cone()?;
    let config = a.config("spectrum", json!({ "resolved_map": map, "resolved_cone": cone }))?;
    let mut warnings = Vec::new();
    if let Some(m) = a.theta_grid {
        let Cone::Psd { dim } = cone else {
            return Err(Failure::Lib(ConeError::Capability("--theta-grid needs a PSD cone".into())));
        };
        if m < 2 {
            return Err(bad("--theta-grid needs at least 2 angles"));
        }
        let mut pairs = Vec::with_capacity(m);
        for i in 0..m {
            let theta = FRAC_PI_2 * i as f64 / (m - 1) as f64;
            let z = psd_z_theta(dim, theta);
            let fz = map.apply(&z)?;
            let value = fz.data().iter().zip(z.data()).map(|(p, q)| p * q).sum::<f64>()
                / z.data().iter().map(|q| q * q).sum::<f64>();
            pairs.push(SampledEigen { theta, pair: EigenPair::certify(&map, &z, value, None)? });
        }
        warnings.push(format!("{m} sampled angles in [0, pi/2]; the spectrum is the closure of the sampled values"));
        let values: Vec<f64> = pairs.iter().map(|p| p.pair.value).collect();
        return Ok(Output { config, result: json!({ "sampled": to_value(&pairs)?, "values": values }), warnings });
    }
    if let MapDescriptor::LorentzSeries { .. } = map {
        let k = a.preset_options()?.k.unwrap_or(20) as usize;
        let built = conespec::maps::build_lorentz_series_map(k, None, None)?;
        if built.map != map {
            return Err(Failure::Lib(ConeError::Capability(
                "analytic Lorentz spectrum is only known for the default series".into(),
            )));
        }
        warnings.push("analytic eigenpairs from the construction; other eigenvalues may exist".into());
        let values: Vec<f64> = built.pairs.iter().map(|p| p.value).collect();
        return Ok(Output {
            config,
            result: json!({ "pairs": to_value(&built.pairs)?, "distinct_values": values, "distinct_count": values.len() }),
            warnings,
        });
    }
    let poly = cone.as_polyhedral().ok_or_else(|| {
        ConeError::Capability(format!("spectrum scan needs a polyhedral cone, got {}", cone.name()))
    })?;
    let lattice = enumerate_parts(&poly)?;
    let params = ScanParams { seed: a.seed, ..ScanParams::default() };
    let summary = spectrum_scan(&map, &cone, &lattice, &params)?;
    if summary.nonconverged > 0 {
        warnings.push(format!("{} iterations did not converge", summary.nonconverged));
    }
    Ok(Output { config, result: to_value(&summary)?, warnings })
}

fn write_csv(path: &PathBuf, report: &conespec::PerturbationReport) -> Run<()> {
    let file = fs::File::create(path).map_err(|e| Failure::Io(format!("cannot create {}: {e}", path.display())))?;
    report.write_csv(file)?;
    Ok(())
}

fn cmd_perturb(a: &Common) -> Run<Output> {
    let params = PerturbParams {
        radius: a.radius_params(),
        distance_samples: a.samples,
        seed: a.seed,
        ..PerturbParams::default()
    };
    let halving = a.paper.as_deref() == Some("section3") || a.family.as_deref() == Some("section3");
    if let Some(p) = a.paper.as_deref().filter(|p| *p != "section3") {
        return Err(bad(format!("unknown experiment {p:?}")));
    }
    if halving {
        let ks = a.k_list()?.unwrap_or_else(|| (3..=8).collect());
        let m_max = if a.kmax == 64 { 32 } else { a.kmax };
        let grid = a.grid.unwrap_or(DEFAULT_GRID);
        let rep = reproduce_halving_discontinuity(&ks, grid, m_max, a.seed)?;
        if let Some(path) = &a.csv {
            write_csv(path, &rep.perturbation)?;
        }
        let mut warnings = rep.warnings.clone();
        warnings.push(format!("grid cone discretized with {grid} intervals"));
        return Ok(Output {
            config: a.config("perturb", json!({ "k_list": ks, "m_max": m_max, "grid_resolved": grid }))?,
            result: to_value(&rep)?,
            warnings,
        });
    }
    let family_name = a.family.clone().unwrap_or_else(|| {
        if a.preset.as_deref() == Some("scaled-linear") { "scaled-linear".into() } else { "scaled".into() }
    });
    let (base, family, cone) = match family_name.as_str() {
        "empty" => {
            let (base, cone) = Common { preset: a.preset.clone().or(Some("zero".into())), ..a.clone() }
                .map_and_cone()
                .unwrap_or((MapDescriptor::zero(2), Cone::orthant(2)));
            (base, Vec::new(), cone)
        }
        "scaled-linear" => {
            let jmax = a.k_list()?.and_then(|v| v.last().copied()).unwrap_or(6);
            let (base, fam) = scaled_linear_family(jmax);
            (base, fam, a.cone()?.unwrap_or(Cone::orthant(2)))
        }
        "scaled" => {
            let (base, cone) = a.map_and_cone()?;
            let ks: Vec<u64> = match a.k_list()? {
                Some(v) => v.into_iter().map(u64::from).collect(),
                None => vec![10, 100, 1000, 10000],
            };
            let fam = scaled_family(&base, &ks);
            (base, fam, cone)
        }
        other => return Err(bad(format!("unknown family {other:?}"))),
    };
    let rep = perturbation_run(&base, &family, &cone, &params)?;
    if let Some(path) = &a.csv {
        write_csv(path, &rep)?;
    }
    let mut warnings = Vec::new();
    sampling_warnings(&cone, &mut warnings);
    warnings.push(format!("map distances are sampled over {} probes", a.samples));
    Ok(Output {
        config: a.config("perturb", json!({ "family_resolved": family_name, "resolved_map": base, "resolved_cone": cone }))?,
        result: to_value(&rep)?,
        warnings,
    })
}

fn parse_coords(s: &str) -> Run<Vec<f64>> {
    let t = s.trim();
    if t.starts_with('[') {
        return serde_json::from_str(t).map_err(|e| bad(format!("bad point {s:?}: {e}")));
    }
    t.trim_matches(|c| c == '(' || c == ')')
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| bad(format!("bad coordinate {v:?}"))))
        .collect()
}

#[derive(Serialize)]
struct ThompsonResult {
    #[serde(with = "conespec::json::extended")]
    distance: f64,
}

fn cmd_thompson(a: &ThompsonArgs) -> Run<Output> {
    let (xs, ys) = (parse_coords(&a.x)?, parse_coords(&a.y)?);
    let cone = match &a.cone {
        Some(c) => parse_cone(c)?,
        None => Cone::orthant(xs.len()),
    };
    let point = |data: Vec<f64>| Point::new(cone.point_kind(), cone.dim(), data);
    let (x, y) = (point(xs)?, point(ys)?);
    for (name, p) in [("x", &x), ("y", &y)] {
        if !cone.contains(p, DEFAULT_TOL)? {
            return Err(bad(format!("{name} is not in {}", cone.name())));
        }
    }
    let distance = cone.thompson_distance(&x, &y)?;
    let mut config = to_value(a)?;
    config.as_object_mut().expect("object").insert("command".into(), json!("thompson"));
    config.as_object_mut().expect("object").insert("resolved_cone".into(), to_value(&cone)?);
    Ok(Output { config, result: to_value(&ThompsonResult { distance })?, warnings: Vec::new() })
}

fn cmd_parts(a: &Common) -> Run<Output> {
    let cone = match a.cone()? {
        Some(c) => c,
        None => return Err(bad("parts needs --cone")),
    };
    let poly = cone
        .as_polyhedral()
        .ok_or_else(|| ConeError::Capability(format!("parts enumeration needs a polyhedral cone, got {}", cone.name())))?;
    let lattice = enumerate_parts(&poly)?;
    let h = heights(&lattice);
    let max_height = h.values().copied().max().unwrap_or(0);
    Ok(Output {
        config: a.config("parts", json!({ "resolved_cone": cone }))?,
        result: json!({ "count": lattice.len(), "max_height": max_height, "parts": to_value(&lattice)? }),
        warnings: Vec::new(),
    })
}

fn cmd_check(a: &Common) -> Run<Output> {
    let (map, cone) = a.map_and_cone()?;
    let order = check_order_preserving(&map, &cone, a.trials, a.seed, a.tol);
    let homogeneous = check_homogeneous(&map, &cone, a.trials, a.seed.wrapping_add(1), a.tol);
    let passed = order.violations == 0 && homogeneous.violations == 0;
    Ok(Output {
        config: a.config("check", json!({ "resolved_map": map, "resolved_cone": cone }))?,
        result: json!({ "order_preserving": to_value(&order)?, "homogeneous": to_value(&homogeneous)?, "passed": passed }),
        warnings: vec![format!("randomized testers over {} trials cannot prove the properties", a.trials)],
    })
}

fn emit(out: &Output, path: Option<&PathBuf>) -> Run<()> {
    let env = Envelope { config: &out.config, result: &out.result, warnings: &out.warnings };
    let text = to_string_17(&env).map_err(|e| Failure::Io(e.to_string()))?;
    match path {
        Some(p) => fs::write(p, text + "\n").map_err(|e| Failure::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (res, out) = match &cli.command {
        Command::Radius(a) => (cmd_radius(a), a.out.as_ref()),
        Command::Spectrum(a) => (cmd_spectrum(a), a.out.as_ref()),
        Command::Perturb(a) => (cmd_perturb(a), a.out.as_ref()),
        Command::Thompson(a) => (cmd_thompson(a), a.out.as_ref()),
        Command::Parts(a) => (cmd_parts(a), a.out.as_ref()),
        Command::Check(a) => (cmd_check(a), a.out.as_ref()),
    };
    match res.and_then(|o| emit(&o, out)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(e)) => {
            eprintln!("conespec: {e}");
            match e {
                ConeError::Capability(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
        Err(Failure::Io(msg)) => {
            eprintln!("conespec: {msg}");
            ExitCode::from(2)
        }
    }
}
