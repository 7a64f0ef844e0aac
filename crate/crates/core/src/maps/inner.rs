//! Increasing self-maps `phi` of `[0,1]` used by composition operators
//! `f -> f o phi` on grid functions.

use serde::{Deserialize, Serialize};

use crate::error::{input, ConeError, Result};

/// `phi_k` is quadratic up to this breakpoint exponent cap.
pub const MAX_K: u32 = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InnerMap {
    /// `t -> t/2`.
    Halving,
    /// `t^2` on `[0, 2^-k]`, then affine with slope `eps_k`.
    PhiK { k: u32 },
    /// Convex piecewise-linear interpolation of `(t, phi(t))` pairs.
    PiecewiseLinear { breakpoints: Vec<[f64; 2]> },
}

/// `eps_k = (1 - 1/(2^k - 1)) / 2`.
pub fn eps_k(k: u32) -> f64 {
    0.5 * (1.0 - 1.0 / ((2f64).powi(k as i32) - 1.0))
}

/// `phi_k(t)` with range checks.
pub fn phi_k_eval(k: u32, t: f64) -> Result<f64> {
    if !(3..=MAX_K).contains(&k) {
        return input(format!("k must lie in [3, {MAX_K}], got {k}"));
    }
    if !(0.0..=1.0).contains(&t) {
        return input(format!("t must lie in [0,1], got {t}"));
    }
    Ok(phi_k(k, t))
}

fn phi_k(k: u32, t: f64) -> f64 {
    let b = (0.5f64).powi(k as i32);
    if t <= b {
        t * t
    } else {
        b * b + eps_k(k) * (t - b)
    }
}

impl InnerMap {
    pub fn validate(&self) -> Result<()> {
        match self {
            InnerMap::Halving => Ok(()),
            InnerMap::PhiK { k } => {
                if (3..=MAX_K).contains(k) {
                    Ok(())
                } else {
                    input(format!("k must lie in [3, {MAX_K}], got {k}"))
                }
            }
            InnerMap::PiecewiseLinear { breakpoints } => {
                let bad = |m: &str| Err(ConeError::Input(format!("piecewise-linear inner map: {m}")));
                if breakpoints.len() < 2 {
                    return bad("needs at least two breakpoints");
                }
                if breakpoints.iter().flatten().any(|v| !v.is_finite()) {
                    return bad("non-finite breakpoint");
                }
                let first = breakpoints[0];
                let last = breakpoints[breakpoints.len() - 1];
                if first != [0.0, 0.0] || last[0] != 1.0 || last[1] > 1.0 {
                    return bad("must start at (0,0), end at t=1 with value <= 1");
                }
                let mut prev_slope = 0.0;
                for w in breakpoints.windows(2) {
                    let dt = w[1][0] - w[0][0];
                    if dt <= 0.0 {
                        return bad("abscissae must increase strictly");
                    }
                    let slope = (w[1][1] - w[0][1]) / dt;
                    if slope < prev_slope - 1e-12 {
                        return bad("must be nondecreasing and convex");
                    }
                    prev_slope = slope;
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        match self {
            InnerMap::Halving => 0.5 * t,
            InnerMap::PhiK { k } => phi_k(*k, t),
            InnerMap::PiecewiseLinear { breakpoints } => {
                let i = breakpoints.partition_point(|b| b[0] <= t).clamp(1, breakpoints.len() - 1);
                let (a, b) = (breakpoints[i - 1], breakpoints[i]);
                a[1] + (b[1] - a[1]) * (t - a[0]) / (b[0] - a[0])
            }
        }
    }

    /// `phi'(0+) = inf_t phi(t)/t` for convex `phi` with `phi(0) = 0`.
    pub fn slope_at_zero(&self) -> f64 {
        match self {
            InnerMap::Halving => 0.5,
            InnerMap::PhiK { .. } => 0.0,
            InnerMap::PiecewiseLinear { breakpoints } => breakpoints[1][1] / breakpoints[1][0],
        }
    }

    /// Below this point `phi` has the closed log form of `log_small`.
    pub fn small_threshold(&self) -> f64 {
        match self {
            InnerMap::Halving => 1.0,
            InnerMap::PhiK { k } => (0.5f64).powi(*k as i32),
            InnerMap::PiecewiseLinear { breakpoints } => breakpoints[1][0],
        }
    }

    /// `log phi(s)` from `log s`, valid for `s <= small_threshold()`.
    pub fn log_small(&self, log_s: f64) -> f64 {
        match self {
            InnerMap::Halving => log_s - std::f64::consts::LN_2,
            InnerMap::PhiK { .. } => 2.0 * log_s,
            InnerMap::PiecewiseLinear { .. } => log_s + self.slope_at_zero().ln(),
        }
    }

    /// `log phi^m(1)` for `m = 1..=mmax`, never leaving the log domain once
    /// the orbit is inside the closed-form region.
    pub fn log_orbit(&self, mmax: usize) -> Vec<f64> {
        let thr = self.small_threshold();
        let mut out = Vec::with_capacity(mmax);
        let mut t = 1.0f64;
        let mut log_t = 0.0f64;
        let mut small = false;
        for _ in 0..mmax {
            if !small && t <= thr {
                small = true;
            }
            if small {
                log_t = self.log_small(log_t);
            } else {
                t = self.eval(t);
                log_t = t.ln();
            }
            out.push(log_t);
        }
        out
    }

    /// `max_t (t/2 - phi(t))`; for convex `phi` this is attained at `t = 1`.
    pub fn gap_to_halving(&self) -> f64 {
        (0.5 - self.eval(1.0)).max(0.0)
    }
}

/// Samples of `t -> v(phi(t))` with `v` interpolated linearly between grid nodes.
pub fn compose_grid(v: &[f64], inner: &InnerMap) -> Vec<f64> {
    let n = v.len() - 1;
    let nf = n as f64;
    (0..=n)
        .map(|j| {
            if j == 0 {
                return v[0];
            }
            interpolate(v, inner.eval(j as f64 / nf) * nf)
        })
        .collect()
}

/// The interpolant of grid samples `v` evaluated at `p` in `[0,1]`.
pub fn compose_value(v: &[f64], p: f64) -> f64 {
    interpolate(v, p * (v.len() - 1) as f64)
}

/// Linear interpolation at fractional grid position `s` in `[0, n]`.
pub(crate) fn interpolate(v: &[f64], s: f64) -> f64 {
    let n = v.len() - 1;
    let s = s.clamp(0.0, n as f64);
    let i = (s.floor() as usize).min(n - 1);
    let frac = s - i as f64;
    if frac == 0.0 {
        v[i]
    } else {
        v[i] + frac * (v[i + 1] - v[i])
    }
}
