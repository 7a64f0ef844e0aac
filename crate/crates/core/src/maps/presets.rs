//! Named maps with their cones.

use super::{build_lattice_map, build_power_mean_map, build_lorentz_series_map, InnerMap, MapDescriptor};
use crate::cone::{Cone, DEFAULT_GRID};
use crate::error::{input, ConeError, Result};
use crate::parts::enumerate_parts;
use crate::point::Point;

pub const PRESET_NAMES: &[&str] = &[
    "paper:T",
    "paper:Tk",
    "paper:psd-f",
    "paper:psd-g",
    "paper:lattice",
    "paper:thm55",
    "paper:thm56",
    "zero",
];

/// Size knobs shared by the presets; `None` picks each preset's default.
#[derive(Debug, Clone, Default)]
pub struct PresetOptions {
    /// `k` of `phi_k`, or the series length of the Lorentz map.
    pub k: Option<u32>,
    /// Dimension for the lattice and PSD maps.
    pub n: Option<usize>,
    /// Grid intervals for composition operators.
    pub grid: Option<usize>,
    /// Cone override (used by the power-mean construction and `zero`).
    pub cone: Option<Cone>,
    /// Power-mean exponent for the power-mean construction.
    pub r: Option<f64>,
}

fn diag_packed(d: &[f64]) -> Vec<f64> {
    Point::sym_diag(d).into_data()
}

/// `X -> (tr(XA) X)^{1/2}` with `A = diag(1, 0, .., 0)`.
pub fn psd_f(n: usize) -> MapDescriptor {
    let mut a = vec![0.0; n];
    a[0] = 1.0;
    MapDescriptor::PsdTrace { n, a: diag_packed(&a), b: None }
}

/// The trace map conjugated by `B = diag(1, 1, 0, .., 0)`; needs `n >= 3`.
pub fn psd_g(n: usize) -> Result<MapDescriptor> {
    if n < 3 {
        return input("the conjugated trace map needs n >= 3");
    }
    let MapDescriptor::PsdTrace { a, .. } = psd_f(n) else { unreachable!() };
    let mut b = vec![0.0; n];
    b[0] = 1.0;
    b[1] = 1.0;
    Ok(MapDescriptor::PsdTrace { n, a, b: Some(diag_packed(&b)) })
}

/// Rank-one projection onto `(cos t, sin t, 0, ..)`.
pub fn psd_z_theta(n: usize, theta: f64) -> Point {
    let (c, s) = (theta.cos(), theta.sin());
    let mut d = vec![0.0; n * n];
    d[0] = c * c;
    d[1] = c * s;
    d[n] = c * s;
    d[n + 1] = s * s;
    Point::sym_from_dense(n, &d)
}

/// `diag(1, alpha, 1, .., 1)`.
pub fn psd_x_alpha(n: usize, alpha: f64) -> Point {
    let mut d = vec![1.0; n];
    d[1] = alpha;
    Point::sym_diag(&d)
}

/// Resolve a preset name to a map and the cone it acts on.
pub fn preset(name: &str, opts: &PresetOptions) -> Result<(MapDescriptor, Cone)> {
    let grid = opts.grid.unwrap_or(DEFAULT_GRID);
    if grid < 2 {
        return input("grid needs at least 2 intervals");
    }
    match name {
        "paper:T" => Ok((MapDescriptor::Composition { inner: InnerMap::Halving }, Cone::grid_convex(grid))),
        "paper:Tk" => {
            let inner = InnerMap::PhiK { k: opts.k.unwrap_or(3) };
            inner.validate()?;
            Ok((MapDescriptor::Composition { inner }, Cone::grid_convex(grid)))
        }
        "paper:psd-f" => {
            let n = opts.n.unwrap_or(3);
            if n < 2 {
                return input("the trace map needs n >= 2");
            }
            Ok((psd_f(n), Cone::psd(n)))
        }
        "paper:psd-g" => {
            let n = opts.n.unwrap_or(3);
            Ok((psd_g(n)?, Cone::psd(n)))
        }
        "paper:lattice" => {
            let n = opts.n.unwrap_or(3);
            Ok((build_lattice_map(n, None)?.map, Cone::orthant(n)))
        }
        "paper:thm55" => {
            let cone = opts.cone.clone().unwrap_or_else(Cone::square);
            let poly = cone
                .as_polyhedral()
                .ok_or_else(|| ConeError::Capability(format!("{} is not polyhedral", cone.name())))?;
            let lattice = enumerate_parts(&poly)?;
            let built = build_power_mean_map(&lattice, opts.r.unwrap_or(-1.0), None, None)?;
            Ok((built.map, cone))
        }
        "paper:thm56" => {
            let k = opts.k.unwrap_or(20) as usize;
            Ok((build_lorentz_series_map(k, None, None)?.map, Cone::lorentz(3)))
        }
        "zero" => {
            let cone = opts.cone.clone().unwrap_or_else(|| Cone::orthant(2));
            let len = cone.zero().data().len();
            Ok((MapDescriptor::zero(len), cone))
        }
        other => input(format!("unknown preset '{other}'; known: {}", PRESET_NAMES.join(", "))),
    }
}
