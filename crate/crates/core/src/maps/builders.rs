//! Constructions with prescribed eigenvectors: the orthant lattice map, maps
//! with one eigenvalue per part of a polyhedral cone, and Lorentz series maps
//! with infinitely many eigenvalues.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{power_mean_values, MapDescriptor, PowerMeanTerm, MAX_LATTICE_DIM, MAX_SERIES};
use crate::error::{input, ConeError, Result};
use crate::parts::{part_of, PartSignature, PartsLattice, PART_TOL};
use crate::point::{dot, Point};
use crate::spectral::EigenPair;

const MAX_DOUBLINGS: usize = 200;

/// A map together with the eigenpairs its construction guarantees.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BuiltMap {
    pub map: MapDescriptor,
    pub pairs: Vec<EigenPair>,
}

/// `lambda_I = |I| + mask(I)/2^n`: strictly increasing along inclusions and
/// pairwise distinct.
pub fn default_lattice_lambdas(n: usize) -> Vec<f64> {
    let scale = (1u64 << n) as f64;
    (1u32..(1 << n)).map(|m| m.count_ones() as f64 + m as f64 / scale).collect()
}

/// The lattice map on `R^n_+` with eigenpairs `(chi^J, lambda_J)`.
pub fn build_lattice_map(n: usize, lambdas: Option<Vec<f64>>) -> Result<BuiltMap> {
    if n == 0 || n > MAX_LATTICE_DIM {
        return input(format!("lattice dimension must lie in [1, {MAX_LATTICE_DIM}]"));
    }
    let lambdas = lambdas.unwrap_or_else(|| default_lattice_lambdas(n));
    let map = MapDescriptor::Lattice { n, lambdas: lambdas.clone() };
    map.validate()?;
    let mut pairs = Vec::with_capacity(lambdas.len());
    for mask in 1u32..(1 << n) {
        let chi = Point::vector((0..n).map(|i| f64::from(mask >> i & 1)).collect());
        let sig = PartSignature::from_mask(mask);
        pairs.push(EigenPair::certify(&map, &chi, lambdas[mask as usize - 1], Some(sig))?);
    }
    Ok(BuiltMap { map, pairs })
}

/// Power-mean combination with one prescribed eigenvalue per nonzero part.
///
/// Parts are processed by height. For a part `Q` the lower parts already fix
/// `w = sum_{P below Q} lambda_P M_r(I(P))(z^Q) u^P`; the new direction
/// `u^Q = mu_Q z^Q - w` (with `lambda_Q M_r(I(Q))(z^Q)` folded out) makes
/// `z^Q` an eigenvector. `mu_Q` doubles until `u^Q` lies in `Q`.
pub fn build_power_mean_map(
    lattice: &PartsLattice,
    r: f64,
    seeds: Option<&BTreeMap<PartSignature, Point>>,
    targets: Option<&BTreeMap<PartSignature, f64>>,
) -> Result<BuiltMap> {
    if r.is_nan() || r >= 0.0 {
        return input(format!("power-mean exponent must be negative, got {r}"));
    }
    let cone = lattice.cone();
    let facets = cone.facets().to_vec();
    let parts: Vec<_> = lattice.nonzero_parts().collect();

    let mut mu: BTreeMap<PartSignature, f64> = BTreeMap::new();
    for (j, p) in parts.iter().enumerate() {
        let v = match targets {
            Some(t) => *t
                .get(&p.signature)
                .ok_or_else(|| ConeError::Input(format!("no target eigenvalue for part {}", p.signature)))?,
            None => (j + 1) as f64,
        };
        if !(v.is_finite() && v > 0.0) {
            return input(format!("target eigenvalue for part {} must be positive", p.signature));
        }
        mu.insert(p.signature, v);
    }
    let vals: Vec<f64> = mu.values().copied().collect();
    for i in 0..vals.len() {
        for k in i + 1..vals.len() {
            if vals[i] == vals[k] {
                return input(format!("repeated target eigenvalue {}", vals[i]));
            }
        }
    }

    let mut z: BTreeMap<PartSignature, Point> = BTreeMap::new();
    for p in &parts {
        let seed = match seeds {
            Some(s) => s
                .get(&p.signature)
                .cloned()
                .ok_or_else(|| ConeError::Input(format!("no seed for part {}", p.signature)))?,
            None => p.witness.clone(),
        };
        let sig = part_of(cone, &seed, PART_TOL)?;
        if sig != p.signature {
            return input(format!("seed for part {} lies in part {}", p.signature, sig));
        }
        z.insert(p.signature, seed);
    }

    let mean = |sig: PartSignature, x: &Point| -> f64 {
        let vals: Vec<f64> = sig.indices().iter().map(|&i| dot(&facets[i], x.data()).max(0.0)).collect();
        power_mean_values(&vals, r)
    };

    let mut terms: Vec<PowerMeanTerm> = Vec::new();
    for p in &parts {
        let q = p.signature;
        let zq = &z[&q];
        let mq = mean(q, zq);
        if p.height == 1 {
            terms.push(PowerMeanTerm { lambda: mu[&q] / mq, signature: q, direction: zq.data().to_vec() });
            continue;
        }
        let mut w = vec![0.0; cone.dim()];
        for t in &terms {
            if t.signature != q && t.signature.is_subset(q) {
                let c = t.lambda * mean(t.signature, zq);
                for (wi, ui) in w.iter_mut().zip(&t.direction) {
                    *wi += c * ui;
                }
            }
        }
        let w = Point::vector(w);
        let mut m = mu[&q];
        let mut doublings = 0;
        loop {
            let u = zq.scaled(m).sub(&w);
            let taken = mu.iter().any(|(s, v)| *s != q && *v == m);
            if !taken && part_of(cone, &u, PART_TOL).map(|s| s == q).unwrap_or(false) {
                break;
            }
            doublings += 1;
            if doublings > MAX_DOUBLINGS {
                return Err(ConeError::Construction(format!(
                    "no admissible eigenvalue found for part {q} after {MAX_DOUBLINGS} doublings"
                )));
            }
            m *= 2.0;
        }
        mu.insert(q, m);
        let u = zq.scaled(m).sub(&w).scaled(1.0 / mq);
        terms.push(PowerMeanTerm { lambda: 1.0, signature: q, direction: u.into_data() });
    }

    let map = MapDescriptor::PowerMeanCombo { r, facets, terms };
    map.validate()?;
    let pairs = parts
        .iter()
        .map(|p| EigenPair::certify(&map, &z[&p.signature], mu[&p.signature], Some(p.signature)))
        .collect::<Result<Vec<_>>>()?;
    Ok(BuiltMap { map, pairs })
}

/// `x^k = (-cos t, -sin t, 1)/sqrt 2`, the unit boundary point of the
/// Lorentz cone where `phi_k` vanishes.
pub fn lorentz_exposed_point(theta: f64) -> [f64; 3] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [-theta.cos() * s, -theta.sin() * s, s]
}

/// Truncated Lorentz series with `K` terms. Defaults: angles `1/k`, weights 1.
pub fn build_lorentz_series_map(k: usize, angles: Option<Vec<f64>>, weights: Option<Vec<f64>>) -> Result<BuiltMap> {
    if k == 0 || k > MAX_SERIES {
        return input(format!("series length must lie in [1, {MAX_SERIES}]"));
    }
    let angles = angles.unwrap_or_else(|| (1..=k).map(|j| 1.0 / j as f64).collect());
    let weights = weights.unwrap_or_else(|| vec![1.0; k]);
    if angles.len() != k {
        return input("one angle per term");
    }
    let map = MapDescriptor::LorentzSeries { angles: angles.clone(), weights: weights.clone() };
    map.validate()?;
    let mut pairs = Vec::with_capacity(k);
    for q in 0..k {
        let xq = lorentz_exposed_point(angles[q]);
        let phi = super::lorentz_functionals(&angles, &xq);
        let m = phi
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != q + 1)
            .map(|(_, v)| *v)
            .fold(f64::INFINITY, f64::min);
        let rho = (0.5f64).powi(q as i32 + 1) * weights[q] * m.max(0.0);
        pairs.push(EigenPair::certify(&map, &Point::vector(xq.to_vec()), rho, None)?);
    }
    let mut vals: Vec<f64> = pairs.iter().map(|p| p.value).collect();
    vals.sort_by(f64::total_cmp);
    if vals.windows(2).any(|w| w[1] - w[0] <= 1e-12 * w[1]) || vals.first().is_some_and(|v| *v <= 0.0) {
        return input("angles and weights give coinciding or vanishing eigenvalues");
    }
    Ok(BuiltMap { map, pairs })
}
