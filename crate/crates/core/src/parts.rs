//! Parts of a polyhedral cone: signatures `I(P)`, witnesses, the domination
//! order and heights in the part poset.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cone::{Cone, PolyhedralCone, DEFAULT_TOL};
use crate::error::{input, ConeError, Result};
use crate::lp::signature_witness;
use crate::point::Point;

/// Largest facet count accepted by the exhaustive subset scan.
pub const MAX_FACETS: usize = 20;
/// Relative threshold for "strictly positive" facet values.
pub const PART_TOL: f64 = 1e-7;
const BIG_M: f64 = 1e6;

/// Set of facet indices (0-based) strictly positive on a part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PartSignature(u32);

impl PartSignature {
    pub const EMPTY: PartSignature = PartSignature(0);

    pub fn from_mask(mask: u32) -> Self {
        PartSignature(mask)
    }

    pub fn from_indices(indices: &[usize]) -> Self {
        PartSignature(indices.iter().fold(0, |m, &i| m | (1 << i)))
    }

    pub fn full(n: usize) -> Self {
        PartSignature(((1u64 << n) - 1) as u32)
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn indices(self) -> Vec<usize> {
        (0..32).filter(|&i| self.contains(i)).collect()
    }

    /// `P ⊴ Q` exactly when `I(P) ⊆ I(Q)`.
    pub fn is_subset(self, other: PartSignature) -> bool {
        self.0 & !other.0 == 0
    }
}

impl fmt::Display for PartSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.indices().iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl Serialize for PartSignature {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.indices().serialize(s)
    }
}

impl<'de> Deserialize<'de> for PartSignature {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(d)?;
        if v.iter().any(|&i| i >= MAX_FACETS) {
            return Err(serde::de::Error::custom("facet index out of range"));
        }
        Ok(PartSignature::from_indices(&v))
    }
}

pub fn part_leq(p: PartSignature, q: PartSignature) -> bool {
    p.is_subset(q)
}

/// One part with a relative-interior witness and its height (0 for `{0}`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Part {
    pub signature: PartSignature,
    #[serde(serialize_with = "witness_data")]
    pub witness: Point,
    pub height: usize,
}

fn witness_data<S: Serializer>(p: &Point, s: S) -> std::result::Result<S::Ok, S::Error> {
    p.data().serialize(s)
}

/// All parts of a polyhedral cone, sorted by `(height, signature)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartsLattice {
    cone: PolyhedralCone,
    parts: Vec<Part>,
}

impl Serialize for PartsLattice {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.parts.serialize(s)
    }
}

impl PartsLattice {
    pub fn cone(&self) -> &PolyhedralCone {
        &self.cone
    }

    pub fn parts(&self) -> &[Part] {
        &self.parts
    }

    /// Parts other than `{0}`, in increasing height.
    pub fn nonzero_parts(&self) -> impl Iterator<Item = &Part> {
        self.parts.iter().filter(|p| !p.signature.is_empty())
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn get(&self, sig: PartSignature) -> Option<&Part> {
        self.parts.iter().find(|p| p.signature == sig)
    }

    pub fn witness(&self, sig: PartSignature) -> Option<&Point> {
        self.get(sig).map(|p| &p.witness)
    }
}

/// Enumerate every part by scanning all facet subsets with a feasibility LP.
pub fn enumerate_parts(cone: &PolyhedralCone) -> Result<PartsLattice> {
    let n = cone.num_facets();
    if n > MAX_FACETS {
        return Err(ConeError::Size(format!("{n} facets exceeds the subset-scan cap of {MAX_FACETS}")));
    }
    let rows = cone.reduced_facets();
    let found: Vec<(PartSignature, Point)> = (1u32..(1u32 << n))
        .into_par_iter()
        .filter_map(|mask| {
            let support: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
            let coords = signature_witness(rows, &support, BIG_M)?;
            let x = Point::vector(cone.lift(&coords));
            let sig = signature_of(cone, &x, PART_TOL);
            (sig.mask() == mask).then_some((sig, x))
        })
        .collect();
    let full = PartSignature::full(n);
    if !found.iter().any(|(s, _)| *s == full) {
        return Err(ConeError::Construction(
            "cone has empty interior in its span: no point is positive on every facet".into(),
        ));
    }
    let mut sigs: Vec<(PartSignature, Point)> = found;
    sigs.sort_by_key(|(s, _)| (s.len(), s.mask()));
    let mut height: BTreeMap<PartSignature, usize> = BTreeMap::new();
    height.insert(PartSignature::EMPTY, 0);
    for (s, _) in &sigs {
        let h = 1 + sigs
            .iter()
            .filter(|(t, _)| *t != *s && t.is_subset(*s))
            .map(|(t, _)| height[t])
            .max()
            .unwrap_or(0);
        height.insert(*s, h);
    }
    let mut parts: Vec<Part> = vec![Part {
        signature: PartSignature::EMPTY,
        witness: Point::vector(vec![0.0; cone.dim()]),
        height: 0,
    }];
    parts.extend(sigs.into_iter().map(|(s, w)| Part { signature: s, witness: w, height: height[&s] }));
    parts.sort_by_key(|p| (p.height, p.signature.mask()));
    Ok(PartsLattice { cone: cone.clone(), parts })
}

/// Heights of the nonzero parts.
pub fn heights(lattice: &PartsLattice) -> BTreeMap<PartSignature, usize> {
    lattice.nonzero_parts().map(|p| (p.signature, p.height)).collect()
}

fn signature_of(cone: &PolyhedralCone, x: &Point, tol: f64) -> PartSignature {
    let s = x.norm();
    let mut mask = 0u32;
    for (i, f) in cone.facets().iter().enumerate() {
        let nf = crate::point::euclid(f);
        if crate::point::dot(f, x.data()) / nf > tol * s {
            mask |= 1 << i;
        }
    }
    PartSignature(mask)
}

/// `I_x = {i : psi_i(x) > tol |x|}`; input error if `x` is not in the cone.
pub fn part_of(cone: &PolyhedralCone, x: &Point, tol: f64) -> Result<PartSignature> {
    let c = Cone::Polyhedral(cone.clone());
    if !c.contains(x, DEFAULT_TOL)? {
        return input("point is not in the cone");
    }
    Ok(signature_of(cone, x, tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthant_counts() {
        for n in 1..=5 {
            let l = enumerate_parts(&PolyhedralCone::orthant(n)).unwrap();
            assert_eq!(l.len(), 1 << n);
        }
        let l = enumerate_parts(&PolyhedralCone::orthant(2)).unwrap();
        let h = heights(&l);
        assert_eq!(h[&PartSignature::from_indices(&[0])], 1);
        assert_eq!(h[&PartSignature::from_indices(&[1])], 1);
        assert_eq!(h[&PartSignature::from_indices(&[0, 1])], 2);
        assert_eq!(l.witness(PartSignature::from_indices(&[1])).unwrap().data(), &[0.0, 1.0]);
    }

    #[test]
    fn square_cone_lattice() {
        let l = enumerate_parts(&PolyhedralCone::square()).unwrap();
        assert_eq!(l.len(), 10);
        let hist = l.nonzero_parts().fold([0usize; 5], |mut acc, p| {
            acc[p.signature.len()] += 1;
            acc
        });
        assert_eq!(hist, [0, 0, 4, 4, 1]);
        for p in l.nonzero_parts() {
            assert_eq!(p.height, p.signature.len() - 1);
        }
        // a ray sits where two adjacent facets meet, e.g. x3 - x1 = x3 - x2 = 0
        let ray = PartSignature::from_indices(&[1, 3]);
        assert_eq!(l.get(ray).unwrap().height, 1);
        assert!(l.get(PartSignature::from_indices(&[2, 3])).is_none());
    }

    #[test]
    fn part_of_examples() {
        let o = PolyhedralCone::orthant(2);
        assert_eq!(part_of(&o, &Point::vector(vec![1.0, 0.0]), PART_TOL).unwrap(), PartSignature::from_indices(&[0]));
        assert_eq!(part_of(&o, &Point::vector(vec![0.0, 0.0]), PART_TOL).unwrap(), PartSignature::EMPTY);
        assert!(part_of(&o, &Point::vector(vec![-1.0, 0.0]), PART_TOL).is_err());
        let sq = PolyhedralCone::square();
        assert_eq!(part_of(&sq, &Point::vector(vec![0.0, 0.0, 1.0]), PART_TOL).unwrap(), PartSignature::full(4));
    }

    #[test]
    fn order_and_json() {
        let a = PartSignature::from_indices(&[0]);
        let b = PartSignature::from_indices(&[0, 1]);
        let c = PartSignature::from_indices(&[0, 2]);
        assert!(part_leq(a, b));
        assert!(part_leq(PartSignature::EMPTY, c));
        assert!(!part_leq(c, b));
        assert_eq!(serde_json::to_string(&b).unwrap(), "[0,1]");
        let l = enumerate_parts(&PolyhedralCone::orthant(1)).unwrap();
        assert_eq!(
            serde_json::to_string(&l).unwrap(),
            r#"[{"signature":[],"witness":[0.0],"height":0},{"signature":[0],"witness":[1.0],"height":1}]"#
        );
        assert_eq!(b.to_string(), "{0,1}");
    }

    #[test]
    fn single_ray_in_plane() {
        let c = PolyhedralCone::with_span(2, vec![vec![1.0, 2.0]], Some(vec![vec![1.0, 2.0]])).unwrap();
        let l = enumerate_parts(&c).unwrap();
        assert_eq!(l.len(), 2);
        assert_eq!(heights(&l)[&PartSignature::from_indices(&[0])], 1);
    }

    #[test]
    fn too_many_facets() {
        let facets: Vec<Vec<f64>> = (0..21)
            .map(|i| {
                let a = i as f64 * 0.29;
                vec![a.cos(), a.sin(), 3.0]
            })
            .collect();
        let c = PolyhedralCone::new(3, facets).unwrap();
        assert!(matches!(enumerate_parts(&c), Err(ConeError::Size(_))));
    }
}
