//! Randomized testers for order preservation and homogeneity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::MapDescriptor;
use crate::cone::Cone;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropertyReport {
    pub trials: usize,
    pub violations: usize,
    /// Smallest relative margin seen; negative beyond `-tol` is a violation.
    #[serde(with = "crate::json::extended")]
    pub worst_margin: f64,
}

fn log_uniform(rng: &mut ChaCha8Rng) -> f64 {
    10f64.powf(rng.gen_range(-3.0..3.0))
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64 + 1);
    rng
}

fn summarize(margins: Vec<f64>, tol: f64) -> PropertyReport {
    PropertyReport {
        trials: margins.len(),
        violations: margins.iter().filter(|m| **m < -tol).count(),
        worst_margin: margins.iter().copied().fold(f64::INFINITY, f64::min),
    }
}

/// Samples pairs `x <= x + c` and checks `f(x) <= f(x + c)`.
pub fn check_order_preserving(map: &MapDescriptor, cone: &Cone, trials: usize, seed: u64, tol: f64) -> PropertyReport {
    let margins: Vec<f64> = (0..trials.max(1))
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let x = cone.sample_unit(&mut rng).scaled(log_uniform(&mut rng));
            let c = cone.sample_unit(&mut rng).scaled(log_uniform(&mut rng));
            let y = x.add(&c);
            match (map.apply_in(cone, &x), map.apply_in(cone, &y)) {
                (Ok(fx), Ok(fy)) => {
                    let scale = fx.norm().max(fy.norm());
                    cone.relative_slack(&fy.sub(&fx), scale).min(0.0)
                }
                _ => f64::NEG_INFINITY,
            }
        })
        .collect();
    summarize(margins, tol)
}

/// Checks `f(a x) = a f(x)` for log-uniform `a` in `[1e-3, 1e3]`, plus `f(0) = 0`.
pub fn check_homogeneous(map: &MapDescriptor, cone: &Cone, trials: usize, seed: u64, tol: f64) -> PropertyReport {
    let mut margins: Vec<f64> = (0..trials.max(1))
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let x = cone.sample_unit(&mut rng);
            let a = log_uniform(&mut rng);
            match (map.apply_in(cone, &x), map.apply_in(cone, &x.scaled(a))) {
                (Ok(fx), Ok(fax)) => -fax.distance(&fx.scaled(a)) / (a * (1.0 + fx.norm())),
                _ => f64::NEG_INFINITY,
            }
        })
        .collect();
    let zero = match map.apply_in(cone, &cone.zero()) {
        Ok(f0) => -f0.norm(),
        Err(_) => f64::NEG_INFINITY,
    };
    let mut report = summarize(std::mem::take(&mut margins), tol);
    if zero < -tol {
        report.violations += 1;
    }
    report.worst_margin = report.worst_margin.min(zero);
    report
}
