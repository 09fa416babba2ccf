//! Classification of self-maps by how they change distances.
//!
//! Every unordered pair of distinct domain points is put in one of three bins
//! by its ratio `r = d(Tx, Ty) / d(x, y)`: shrinking (`r < 1 - tol`), neutral
//! (`|r - 1| <= tol`) or growing (`r > 1 + tol`). In exact mode `tol` is
//! ignored and the comparison is exact. The classes then follow:
//!
//! | class                      | condition                                       |
//! |----------------------------|-------------------------------------------------|
//! | `NotExpansive`             | some pair shrinks                               |
//! | `Isometry`                 | every pair is neutral                           |
//! | `ProperNotStrict`          | some pair grows, some pair has `r <= 1`         |
//! | `StrictNotAnticontraction` | some pair grows, every raw `r > 1`, some `r` within `tol` of 1 |
//! | `Anticontraction`          | every pair grows; `E` is the minimum ratio      |
//!
//! On a finite space "every ratio above 1" and "infimum above 1" coincide, so
//! `StrictNotAnticontraction` only appears through the tolerance band. The
//! infinite examples that are strict but not anticontractions are decided by
//! limit checks in [`crate::gallery`].

use std::cmp::Ordering;

use num_traits::{CheckedDiv, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{exact_to_f64, Exact, FiniteMetricSpace, PointId, SelfMap};

/// One pair of distinct points with its distance before and after the map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairWitness {
    pub x: PointId,
    pub y: PointId,
    pub d_xy: f64,
    pub d_txty: f64,
    pub ratio: f64,
}

impl PairWitness {
    fn new(space: &FiniteMetricSpace, x: PointId, y: PointId, tx: PointId, ty: PointId) -> Self {
        let d_xy = space.distance(x, y);
        let d_txty = space.distance(tx, ty);
        Self {
            x,
            y,
            d_xy,
            d_txty,
            ratio: d_txty / d_xy,
        }
    }

    /// Recompute the distances and check they match the recorded values.
    pub fn reproduces(&self, space: &FiniteMetricSpace, map: &SelfMap) -> bool {
        let (Some(tx), Some(ty)) = (map.apply(self.x), map.apply(self.y)) else {
            return false;
        };
        self.x != self.y && space.distance(self.x, self.y) == self.d_xy && space.distance(tx, ty) == self.d_txty
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioProfile {
    pub min_ratio: f64,
    /// `None` stands for `+∞` (a zero distance between distinct points).
    pub max_ratio: Option<f64>,
    pub argmin: (PointId, PointId),
    pub argmax: (PointId, PointId),
    /// Exact minimum ratio as `p/q`, in exact mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_ratio_exact: Option<String>,
    pub pairs: usize,
}

fn domain_pairs(map: &SelfMap) -> Vec<(PointId, PointId, PointId, PointId)> {
    let graph: Vec<_> = map.graph().collect();
    let mut pairs = Vec::with_capacity(graph.len() * graph.len().saturating_sub(1) / 2);
    for (i, &(x, tx)) in graph.iter().enumerate() {
        for &(y, ty) in &graph[i + 1..] {
            pairs.push((x, y, tx, ty));
        }
    }
    pairs
}

fn ensure_pairs(space: &FiniteMetricSpace, map: &SelfMap) -> Result<()> {
    map.check_against(space)?;
    let n = map.domain().count();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    Ok(())
}

fn exact_ratio(space: &FiniteMetricSpace, x: PointId, y: PointId, tx: PointId, ty: PointId) -> Option<Exact> {
    let num = space.exact_distance(tx, ty)?;
    let den = space.exact_distance(x, y)?;
    if den.is_zero() {
        return None;
    }
    num.checked_div(&den)
}

/// Minimum and maximum of `d(Tx, Ty) / d(x, y)` over unordered pairs of
/// distinct domain points. Ties go to the first pair in index order.
pub fn ratio_profile(space: &FiniteMetricSpace, map: &SelfMap) -> Result<RatioProfile> {
    ensure_pairs(space, map)?;
    let pairs = domain_pairs(map);
    let mut min = (f64::INFINITY, (PointId(0), PointId(0)));
    let mut max = (f64::NEG_INFINITY, (PointId(0), PointId(0)));
    let mut min_exact: Option<(Exact, (PointId, PointId))> = None;
    for &(x, y, tx, ty) in &pairs {
        let r = space.distance(tx, ty) / space.distance(x, y);
        if r < min.0 {
            min = (r, (x, y));
        }
        if r > max.0 {
            max = (r, (x, y));
        }
        if let Some(q) = exact_ratio(space, x, y, tx, ty) {
            if min_exact.as_ref().is_none_or(|(m, _)| q < *m) {
                min_exact = Some((q, (x, y)));
            }
        }
    }
    // exact mode decides the argmin when the float ratios round together
    if let Some((q, pair)) = &min_exact {
        min = (exact_to_f64(q), *pair);
    }
    Ok(RatioProfile {
        min_ratio: min.0,
        max_ratio: max.0.is_finite().then_some(max.0),
        argmin: min.1,
        argmax: max.1,
        min_ratio_exact: min_exact.map(|(q, _)| q.to_string()),
        pairs: pairs.len(),
    })
}

/// Position of a map in the expansion hierarchy, with witnesses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class")]
pub enum ExpansionClass {
    /// Some pair gets closer; `witness` is the pair with the smallest ratio.
    NotExpansive { witness: PairWitness },
    Isometry,
    ProperNotStrict { strict: PairWitness, equality: PairWitness },
    StrictNotAnticontraction { weakest: PairWitness },
    Anticontraction {
        #[serde(rename = "E")]
        e: f64,
        #[serde(rename = "E_exact", skip_serializing_if = "Option::is_none")]
        e_exact: Option<String>,
        weakest: PairWitness,
    },
}

impl ExpansionClass {
    pub fn name(&self) -> &'static str {
        match self {
            Self::NotExpansive { .. } => "NotExpansive",
            Self::Isometry => "Isometry",
            Self::ProperNotStrict { .. } => "ProperNotStrict",
            Self::StrictNotAnticontraction { .. } => "StrictNotAnticontraction",
            Self::Anticontraction { .. } => "Anticontraction",
        }
    }

    pub fn is_expansive(&self) -> bool {
        !matches!(self, Self::NotExpansive { .. })
    }

    pub fn is_isometry(&self) -> bool {
        matches!(self, Self::Isometry)
    }

    /// The certified expansion constant, for anticontractions.
    pub fn expansion_constant(&self) -> Option<f64> {
        match self {
            Self::Anticontraction { e, .. } => Some(*e),
            _ => None,
        }
    }

    pub fn witnesses(&self) -> Vec<&PairWitness> {
        match self {
            Self::NotExpansive { witness } => vec![witness],
            Self::Isometry => vec![],
            Self::ProperNotStrict { strict, equality } => vec![strict, equality],
            Self::StrictNotAnticontraction { weakest } => vec![weakest],
            Self::Anticontraction { weakest, .. } => vec![weakest],
        }
    }

    /// Re-evaluate every witness against the space and map, and check that it
    /// still shows what the class claims.
    pub fn verify(&self, space: &FiniteMetricSpace, map: &SelfMap, tol: f64) -> bool {
        if !self.witnesses().iter().all(|w| w.reproduces(space, map)) {
            return false;
        }
        let bin = |w: &PairWitness| crate::metric::cmp_rel(w.d_txty, w.d_xy, tol);
        match self {
            Self::NotExpansive { witness } => witness.d_txty < witness.d_xy,
            Self::Isometry => true,
            Self::ProperNotStrict { strict, equality } => {
                bin(strict) == Ordering::Greater && bin(equality) == Ordering::Equal && equality.d_txty <= equality.d_xy
            }
            Self::StrictNotAnticontraction { weakest } => weakest.d_txty > weakest.d_xy,
            Self::Anticontraction { e, weakest, .. } => *e > 1.0 && weakest.d_txty > weakest.d_xy,
        }
    }
}

/// Classification report: `{ "class": ..., "E": ..., "witnesses": [...] }`
/// plus what was scanned.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    #[serde(rename = "class")]
    pub class_name: &'static str,
    #[serde(rename = "E")]
    pub e: Option<f64>,
    #[serde(rename = "E_exact", skip_serializing_if = "Option::is_none")]
    pub e_exact: Option<String>,
    pub witnesses: Vec<PairWitness>,
    /// `true` when the map is a sampled restriction rather than a total self-map.
    pub restricted: bool,
    pub exact: bool,
    pub pairs: usize,
    pub profile: RatioProfile,
    #[serde(skip)]
    pub class: ExpansionClass,
}

/// Place `map` in the expansion hierarchy.
pub fn classify(space: &FiniteMetricSpace, map: &SelfMap, tol: f64) -> Result<ExpansionClass> {
    classify_detailed(space, map, tol).map(|c| c.class)
}

pub fn classify_detailed(space: &FiniteMetricSpace, map: &SelfMap, tol: f64) -> Result<Classification> {
    let profile = ratio_profile(space, map)?;
    let pairs = domain_pairs(map);

    let mut shrink = 0usize;
    let mut grow = 0usize;
    let mut near_above = 0usize;
    let mut first_growing = None;
    let mut first_neutral_at_most_one = None;
    for &(x, y, tx, ty) in &pairs {
        match space.cmp_pairs((tx.0, ty.0), (x.0, y.0), tol) {
            Ordering::Less => shrink += 1,
            Ordering::Greater => {
                grow += 1;
                first_growing.get_or_insert((x, y, tx, ty));
            }
            Ordering::Equal => {
                if !space.is_exact() && space.distance(tx, ty) > space.distance(x, y) {
                    near_above += 1;
                } else {
                    first_neutral_at_most_one.get_or_insert((x, y, tx, ty));
                }
            }
        }
    }

    let witness = |(x, y): (PointId, PointId)| {
        PairWitness::new(space, x, y, map.apply(x).unwrap(), map.apply(y).unwrap())
    };
    let total = pairs.len();
    let class = if shrink > 0 {
        ExpansionClass::NotExpansive {
            witness: witness(profile.argmin),
        }
    } else if grow == 0 {
        ExpansionClass::Isometry
    } else if grow + near_above == total && near_above > 0 {
        ExpansionClass::StrictNotAnticontraction {
            weakest: witness(profile.argmin),
        }
    } else if grow == total {
        ExpansionClass::Anticontraction {
            e: profile.min_ratio,
            e_exact: profile.min_ratio_exact.clone(),
            weakest: witness(profile.argmin),
        }
    } else {
        let (x, y, tx, ty) = first_growing.unwrap();
        let strict = PairWitness::new(space, x, y, tx, ty);
        let (x, y, tx, ty) = first_neutral_at_most_one.unwrap();
        ExpansionClass::ProperNotStrict {
            strict,
            equality: PairWitness::new(space, x, y, tx, ty),
        }
    };
    Ok(Classification {
        class_name: class.name(),
        e: class.expansion_constant(),
        e_exact: match &class {
            ExpansionClass::Anticontraction { e_exact, .. } => e_exact.clone(),
            _ => None,
        },
        witnesses: class.witnesses().into_iter().cloned().collect(),
        class,
        restricted: !map.is_total(),
        exact: space.is_exact(),
        pairs: total,
        profile,
    })
}

/// Fast expansiveness test: no pair of distinct domain points gets closer.
pub fn is_expansive(space: &FiniteMetricSpace, map: &SelfMap, tol: f64) -> bool {
    domain_pairs(map)
        .into_iter()
        .all(|(x, y, tx, ty)| space.cmp_pairs((tx.0, ty.0), (x.0, y.0), tol) != Ordering::Less)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Surjectivity {
    pub surjective: bool,
    /// Domain points that are not the image of any domain point.
    pub missing: Vec<PointId>,
}

/// Whether the image covers the whole domain.
pub fn is_surjective(space: &FiniteMetricSpace, map: &SelfMap) -> Result<Surjectivity> {
    map.check_against(space)?;
    let mut hit = vec![false; space.len()];
    for (_, y) in map.graph() {
        hit[y.0] = true;
    }
    let missing: Vec<PointId> = map.domain().filter(|p| !hit[p.0]).collect();
    Ok(Surjectivity {
        surjective: missing.is_empty(),
        missing,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RangeDensity {
    pub epsilon: f64,
    pub dense: bool,
    /// Domain point farthest from the image, with that distance.
    pub worst_point: PointId,
    pub worst_distance: f64,
}

/// Whether every domain point lies within `epsilon` of the image.
pub fn range_density(space: &FiniteMetricSpace, map: &SelfMap, epsilon: f64) -> Result<RangeDensity> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    map.check_against(space)?;
    let images: Vec<PointId> = map.graph().map(|(_, y)| y).collect();
    let mut worst = (PointId(0), f64::NEG_INFINITY);
    for p in map.domain() {
        let gap = images.iter().map(|&y| space.distance(p, y)).fold(f64::INFINITY, f64::min);
        if gap > worst.1 {
            worst = (p, gap);
        }
    }
    if images.is_empty() {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    Ok(RangeDensity {
        epsilon,
        dense: worst.1 <= epsilon,
        worst_point: worst.0,
        worst_distance: worst.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{FiniteMetricSpace, DEFAULT_TOL};

    fn two_points() -> FiniteMetricSpace {
        FiniteMetricSpace::from_integers(&[0, 1])
    }

    /// {0, 1, 2} on the line inside {0, 1, 2, 4}, with x ↦ 2x.
    fn doubling() -> (FiniteMetricSpace, SelfMap) {
        let space = FiniteMetricSpace::from_integers(&[0, 1, 2, 4]);
        let map = SelfMap::restricted(4, [(0, 0), (1, 2), (2, 3)]);
        (space, map)
    }

    #[test]
    fn identity_profile_is_flat() {
        let s = FiniteMetricSpace::from_integers(&[0, 3, 7, 8]);
        let p = ratio_profile(&s, &SelfMap::identity(4)).unwrap();
        assert_eq!((p.min_ratio, p.max_ratio), (1.0, Some(1.0)));
        assert_eq!(classify(&s, &SelfMap::identity(4), DEFAULT_TOL).unwrap(), ExpansionClass::Isometry);
    }

    #[test]
    fn doubling_map_on_line_sample() {
        let (s, m) = doubling();
        let p = ratio_profile(&s, &m).unwrap();
        assert_eq!((p.min_ratio, p.max_ratio), (2.0, Some(2.0)));
        assert_eq!(p.min_ratio_exact.as_deref(), Some("2"));
        let c = classify_detailed(&s, &m, DEFAULT_TOL).unwrap();
        assert!(c.restricted);
        assert_eq!(c.class.expansion_constant(), Some(2.0));
        assert!(c.class.verify(&s, &m, DEFAULT_TOL));
    }

    #[test]
    fn constant_map_shrinks() {
        let s = two_points();
        let m = SelfMap::constant(2, 0);
        let p = ratio_profile(&s, &m).unwrap();
        assert_eq!((p.min_ratio, p.max_ratio), (0.0, Some(0.0)));
        let c = classify(&s, &m, DEFAULT_TOL).unwrap();
        match &c {
            ExpansionClass::NotExpansive { witness } => {
                assert_eq!((witness.x, witness.y), (PointId(0), PointId(1)));
                assert_eq!(witness.d_txty, 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(c.verify(&s, &m, DEFAULT_TOL));
    }

    #[test]
    fn singleton_is_a_domain_error() {
        let s = FiniteMetricSpace::from_integers(&[5]);
        assert_eq!(
            classify(&s, &SelfMap::identity(1), DEFAULT_TOL),
            Err(Error::TooFewPoints { needed: 2, got: 1 })
        );
        assert!(ratio_profile(&s, &SelfMap::identity(1)).is_err());
    }

    #[test]
    fn proper_but_not_strict() {
        // 0 ↦ 0, 1 ↦ -2, 10 ↦ 10: ratios 2, 12/9 and 1
        let s = FiniteMetricSpace::from_integers(&[0, 1, -2, 10]);
        let m = SelfMap::restricted(4, [(0, 0), (1, 2), (3, 3)]);
        let c = classify(&s, &m, DEFAULT_TOL).unwrap();
        assert_eq!(c.name(), "ProperNotStrict");
        assert!(c.verify(&s, &m, DEFAULT_TOL));
    }

    #[test]
    fn near_one_ratios_give_strict_not_anticontraction() {
        let v: [f64; 5] = [0.0, 1.0, 3.0, 1.0 + 1e-12, 9.0];
        let s = FiniteMetricSpace::from_fn(5, |i, j| (v[i] - v[j]).abs());
        // 0 ↦ 0, 1 ↦ 1 + 1e-12, 3 ↦ 9: ratios 1 + 1e-12, 3 and about 4
        let m = SelfMap::restricted(5, [(0, 0), (1, 3), (2, 4)]);
        let c = classify(&s, &m, 1e-9).unwrap();
        assert_eq!(c.name(), "StrictNotAnticontraction");
        assert!(c.verify(&s, &m, 1e-9));
        // the same thing with tol = 0 is an anticontraction with E barely above 1
        assert_eq!(classify(&s, &m, 0.0).unwrap().name(), "Anticontraction");
    }

    #[test]
    fn surjectivity() {
        let s = FiniteMetricSpace::from_integers(&[0, 1, 2]);
        assert!(is_surjective(&s, &SelfMap::new(vec![2, 0, 1])).unwrap().surjective);
        let c = is_surjective(&two_points(), &SelfMap::constant(2, 0)).unwrap();
        assert_eq!(c.missing, vec![PointId(1)]);
    }

    #[test]
    fn density_of_a_surjection() {
        let s = FiniteMetricSpace::from_integers(&[0, 1, 2]);
        let r = range_density(&s, &SelfMap::new(vec![1, 2, 0]), 1e-6).unwrap();
        assert!(r.dense);
        assert_eq!(r.worst_distance, 0.0);
        assert!(range_density(&s, &SelfMap::identity(3), 0.0).is_err());
    }

    #[test]
    fn classification_serializes_with_class_tag() {
        let (s, m) = doubling();
        let json = serde_json::to_value(classify_detailed(&s, &m, DEFAULT_TOL).unwrap()).unwrap();
        assert_eq!(json["class"], "Anticontraction");
        assert_eq!(json["E"], 2.0);
        assert_eq!(json["witnesses"].as_array().unwrap().len(), 1);
        assert_eq!(json["restricted"], true);
    }
}
