//! Finite metric spaces, self-maps on them, and the basic measurements
//! (axiom validation, diameter, minimum ε-nets, iteration).
//!
//! A [`FiniteMetricSpace`] always carries an `f64` distance matrix. It may in
//! addition carry an exact rational matrix; when present, every comparison made
//! by the classifier and the enumeration harness uses the exact values and the
//! tolerance is ignored.

use std::cmp::Ordering;
use std::fmt;

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative tolerance for float comparisons.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Exact distance values.
pub type Exact = Rational64;

/// Index of a point in a finite space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointId(pub usize);

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Compare `a` with `b`, treating them as equal when they differ by at most
/// `tol` relative to the larger magnitude.
pub fn cmp_rel(a: f64, b: f64, tol: f64) -> Ordering {
    let scale = a.abs().max(b.abs());
    if (a - b).abs() <= tol * scale {
        Ordering::Equal
    } else if a < b {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

/// Lossless-as-possible conversion of an exact value for reporting.
pub fn exact_to_f64(q: &Exact) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    dist: Vec<f64>,
    exact: Option<Vec<Exact>>,
}

fn check_square<T>(labels: &[String], rows: &[Vec<T>]) -> Result<()> {
    if rows.len() != labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} labels but {} matrix rows",
            labels.len(),
            rows.len()
        )));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != rows.len() {
            return Err(Error::DimensionMismatch(format!(
                "row {i} has {} entries, expected {}",
                row.len(),
                rows.len()
            )));
        }
    }
    Ok(())
}

fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("p{i}")).collect()
}

impl FiniteMetricSpace {
    /// Build a float-mode space. Only the shape is checked here; use
    /// [`validate_metric`] for the axioms.
    pub fn new(labels: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        check_square(&labels, &rows)?;
        Ok(Self {
            labels,
            dist: rows.into_iter().flatten().collect(),
            exact: None,
        })
    }

    /// Build an exact-mode space from rational distances.
    pub fn new_exact(labels: Vec<String>, rows: Vec<Vec<Exact>>) -> Result<Self> {
        check_square(&labels, &rows)?;
        let exact: Vec<Exact> = rows.into_iter().flatten().collect();
        Ok(Self {
            labels,
            dist: exact.iter().map(exact_to_f64).collect(),
            exact: Some(exact),
        })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut dist = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                dist.push(if i == j { 0.0 } else { f(i, j) });
            }
        }
        Self {
            labels: default_labels(n),
            dist,
            exact: None,
        }
    }

    pub fn from_fn_exact(n: usize, f: impl Fn(usize, usize) -> Exact) -> Self {
        let mut exact = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                exact.push(if i == j { Exact::zero() } else { f(i, j) });
            }
        }
        Self {
            labels: default_labels(n),
            dist: exact.iter().map(exact_to_f64).collect(),
            exact: Some(exact),
        }
    }

    /// Points of an abstract space with a distance rule; labels via `Debug`.
    pub fn from_points<P: fmt::Debug>(points: &[P], d: impl Fn(&P, &P) -> f64) -> Self {
        let mut space = Self::from_fn(points.len(), |i, j| d(&points[i], &points[j]));
        space.labels = points.iter().map(|p| format!("{p:?}")).collect();
        space
    }

    /// Integers on the real line with `|x - y|`, in exact mode.
    pub fn from_integers(values: &[i64]) -> Self {
        let mut space =
            Self::from_fn_exact(values.len(), |i, j| Exact::from_integer((values[i] - values[j]).abs()));
        space.labels = values.iter().map(|v| v.to_string()).collect();
        space
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} points",
                labels.len(),
                self.len()
            )));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, p: PointId) -> &str {
        &self.labels[p.0]
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn points(&self) -> impl Iterator<Item = PointId> {
        (0..self.len()).map(PointId)
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.len() + j]
    }

    pub fn distance(&self, a: PointId, b: PointId) -> f64 {
        self.d(a.0, b.0)
    }

    pub fn exact_distance(&self, a: PointId, b: PointId) -> Option<Exact> {
        self.exact.as_ref().map(|e| e[a.0 * self.len() + b.0])
    }

    /// Order of `d(a, b)` relative to `d(c, d)`. Exact when the space is exact,
    /// otherwise up to relative `tol`.
    #[inline]
    pub fn cmp_pairs(&self, (a, b): (usize, usize), (c, d): (usize, usize), tol: f64) -> Ordering {
        let n = self.len();
        match &self.exact {
            Some(e) => e[a * n + b].cmp(&e[c * n + d]),
            None => cmp_rel(self.dist[a * n + b], self.dist[c * n + d], tol),
        }
    }

    /// Sub-space on the given points, in the given order.
    pub fn restrict(&self, subset: &[PointId]) -> Self {
        let labels = subset.iter().map(|p| self.labels[p.0].clone()).collect();
        let mut dist = Vec::with_capacity(subset.len() * subset.len());
        for a in subset {
            for b in subset {
                dist.push(self.distance(*a, *b));
            }
        }
        let exact = self.exact.as_ref().map(|_| {
            subset
                .iter()
                .flat_map(|a| subset.iter().map(move |b| (*a, *b)))
                .map(|(a, b)| self.exact_distance(a, b).unwrap())
                .collect()
        });
        Self { labels, dist, exact }
    }

    /// The same space with every distance multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            labels: self.labels.clone(),
            dist: self.dist.iter().map(|d| d * c).collect(),
            exact: None,
        }
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.dist.chunks(self.len().max(1)).map(|r| r.to_vec()).collect()
    }

    /// Sum of `d(x, y)` over unordered pairs.
    pub fn total_pair_distance(&self) -> f64 {
        let n = self.len();
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| self.d(i, j)).sum()
    }
}

/// Entry in a space document: a number, or a rational string such as `"3/4"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DistanceEntry {
    Number(f64),
    Text(String),
}

fn parse_rational(s: &str) -> Result<Exact> {
    let bad = || Error::InvalidArgument(format!("cannot parse {s:?} as a rational"));
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: i64 = p.trim().parse().map_err(|_| bad())?;
            let q: i64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0 {
                return Err(bad());
            }
            Ok(Exact::new(p, q))
        }
        None => Ok(Exact::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

impl DistanceEntry {
    fn to_exact(&self) -> Result<Exact> {
        match self {
            Self::Text(s) => parse_rational(s),
            Self::Number(x) if x.fract() == 0.0 && x.abs() < 9.0e15 => Ok(Exact::from_integer(*x as i64)),
            Self::Number(x) => Exact::approximate_float(*x)
                .filter(|q| exact_to_f64(q) == *x)
                .ok_or_else(|| Error::InvalidArgument(format!("{x} has no exact small rational form"))),
        }
    }

    fn to_f64(&self) -> Result<f64> {
        match self {
            Self::Number(x) => Ok(*x),
            Self::Text(s) => parse_rational(s).map(|q| exact_to_f64(&q)),
        }
    }
}

/// JSON form of a finite space: `{ "labels": [...], "dist": [[...]] }`, with an
/// optional `"exact": true` switching on rational comparisons.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceDocument {
    pub labels: Vec<String>,
    pub dist: Vec<Vec<DistanceEntry>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub exact: bool,
}

impl TryFrom<SpaceDocument> for FiniteMetricSpace {
    type Error = Error;

    fn try_from(doc: SpaceDocument) -> Result<Self> {
        if doc.exact {
            let rows = doc
                .dist
                .iter()
                .map(|r| r.iter().map(DistanceEntry::to_exact).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            Self::new_exact(doc.labels, rows)
        } else {
            let rows = doc
                .dist
                .iter()
                .map(|r| r.iter().map(DistanceEntry::to_f64).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            Self::new(doc.labels, rows)
        }
    }
}

impl From<&FiniteMetricSpace> for SpaceDocument {
    fn from(space: &FiniteMetricSpace) -> Self {
        let n = space.len();
        let dist = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| match space.exact_distance(PointId(i), PointId(j)) {
                        Some(q) if *q.denom() == 1 => DistanceEntry::Number(*q.numer() as f64),
                        Some(q) => DistanceEntry::Text(q.to_string()),
                        None => DistanceEntry::Number(space.d(i, j)),
                    })
                    .collect()
            })
            .collect();
        Self {
            labels: space.labels.clone(),
            dist,
            exact: space.is_exact(),
        }
    }
}

/// Machine-readable code for a violated metric axiom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    NonFinite,
    NonzeroDiagonal,
    Asymmetric,
    NonPositive,
    Triangle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    /// For `TRIANGLE`, `[a, b, c]` with `d(a, c) > d(a, b) + d(b, c)`.
    pub points: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violation_count: usize,
    /// At most [`ValidationReport::MAX_LISTED`] violations are listed.
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub const MAX_LISTED: usize = 64;

    fn push(&mut self, code: ViolationCode, points: Vec<usize>) {
        self.valid = false;
        self.violation_count += 1;
        if self.violations.len() < Self::MAX_LISTED {
            self.violations.push(Violation { code, points });
        }
    }
}

/// Check the four metric axioms. Degenerate triangles are allowed. In exact
/// mode `tol` is ignored.
pub fn validate_metric(space: &FiniteMetricSpace, tol: f64) -> ValidationReport {
    let n = space.len();
    let mut report = ValidationReport {
        valid: true,
        violation_count: 0,
        violations: Vec::new(),
    };

    for i in 0..n {
        for j in 0..n {
            if !space.d(i, j).is_finite() {
                report.push(ViolationCode::NonFinite, vec![i, j]);
            }
        }
    }
    if !report.valid {
        return report;
    }

    let scale = space.dist.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let exact = space.exact.as_ref();
    let ex = |i: usize, j: usize| exact.map(|e| e[i * n + j]);

    for i in 0..n {
        let bad = match ex(i, i) {
            Some(q) => !q.is_zero(),
            None => space.d(i, i).abs() > tol * scale,
        };
        if bad {
            report.push(ViolationCode::NonzeroDiagonal, vec![i]);
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let asym = match (ex(i, j), ex(j, i)) {
                (Some(a), Some(b)) => a != b,
                _ => cmp_rel(space.d(i, j), space.d(j, i), tol) != Ordering::Equal,
            };
            if asym {
                report.push(ViolationCode::Asymmetric, vec![i, j]);
            }
            for (a, b) in [(i, j), (j, i)] {
                let nonpos = match ex(a, b) {
                    Some(q) => q <= Exact::zero(),
                    None => space.d(a, b) <= 0.0,
                };
                if nonpos {
                    report.push(ViolationCode::NonPositive, vec![a, b]);
                }
            }
        }
    }
    for a in 0..n {
        for c in 0..n {
            if a == c {
                continue;
            }
            for b in 0..n {
                if b == a || b == c {
                    continue;
                }
                let broken = match (ex(a, c), ex(a, b), ex(b, c)) {
                    (Some(ac), Some(ab), Some(bc)) => ac > ab + bc,
                    _ => cmp_rel(space.d(a, c), space.d(a, b) + space.d(b, c), tol) == Ordering::Greater,
                };
                if broken {
                    report.push(ViolationCode::Triangle, vec![a, b, c]);
                }
            }
        }
    }
    report
}

/// Largest pairwise distance; `0` for a singleton.
pub fn diameter(space: &FiniteMetricSpace) -> Result<f64> {
    if space.is_empty() {
        return Err(Error::EmptySpace);
    }
    Ok(space.dist.iter().copied().fold(0.0, f64::max))
}

/// Exact diameter, when the space is exact.
pub fn exact_diameter(space: &FiniteMetricSpace) -> Result<Option<Exact>> {
    if space.is_empty() {
        return Err(Error::EmptySpace);
    }
    Ok(space.exact.as_ref().map(|e| e.iter().copied().max().unwrap()))
}

/// Largest space for which [`min_epsilon_net`] runs the exhaustive search.
pub const EXACT_NET_LIMIT: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonNet {
    pub epsilon: f64,
    pub centers: Vec<PointId>,
    /// `true` when the size is certified minimal (exhaustive search).
    pub optimal: bool,
    /// Size of a set of points pairwise more than `2ε` apart; no net can be smaller.
    pub lower_bound: usize,
}

impl EpsilonNet {
    pub fn size(&self) -> usize {
        self.centers.len()
    }
}

fn within(d: f64, eps: f64) -> bool {
    d <= eps * (1.0 + DEFAULT_TOL)
}

/// Smallest set of points whose closed ε-balls cover the space. Exhaustive
/// for at most [`EXACT_NET_LIMIT`] points, greedy (and flagged) above that.
pub fn min_epsilon_net(space: &FiniteMetricSpace, epsilon: f64) -> Result<EpsilonNet> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    let n = space.len();
    if n == 0 {
        return Ok(EpsilonNet {
            epsilon,
            centers: Vec::new(),
            optimal: true,
            lower_bound: 0,
        });
    }
    let lower_bound = packing_lower_bound(space, epsilon);
    let centers = if n <= EXACT_NET_LIMIT {
        exact_net(space, epsilon)
    } else {
        greedy_net(space, epsilon)
    };
    // a greedy net that meets the packing bound is optimal too
    let optimal = n <= EXACT_NET_LIMIT || centers.len() == lower_bound;
    Ok(EpsilonNet {
        epsilon,
        centers: centers.into_iter().map(PointId).collect(),
        optimal,
        lower_bound,
    })
}

fn exact_net(space: &FiniteMetricSpace, eps: f64) -> Vec<usize> {
    let n = space.len();
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let cover: Vec<u32> = (0..n)
        .map(|c| (0..n).filter(|&p| within(space.d(c, p), eps)).fold(0, |m, p| m | (1 << p)))
        .collect();
    for k in 1..=n {
        // masks with exactly k bits set, in increasing order (Gosper's hack)
        let mut mask: u32 = (1u32 << k) - 1;
        while mask <= full {
            let covered = (0..n).filter(|i| mask & (1 << i) != 0).fold(0, |m, i| m | cover[i]);
            if covered == full {
                return (0..n).filter(|i| mask & (1 << i) != 0).collect();
            }
            let low = mask & mask.wrapping_neg();
            let ripple = mask + low;
            if ripple == 0 || ripple > full + 1 {
                break;
            }
            mask = (((ripple ^ mask) >> 2) / low) | ripple;
        }
    }
    (0..n).collect()
}

fn greedy_net(space: &FiniteMetricSpace, eps: f64) -> Vec<usize> {
    let n = space.len();
    let mut uncovered = vec![true; n];
    let mut left = n;
    let mut centers = Vec::new();
    while left > 0 {
        let best = (0..n)
            .max_by_key(|&c| {
                let gain = (0..n).filter(|&p| uncovered[p] && within(space.d(c, p), eps)).count();
                (gain, std::cmp::Reverse(c))
            })
            .unwrap();
        for p in 0..n {
            if uncovered[p] && within(space.d(best, p), eps) {
                uncovered[p] = false;
                left -= 1;
            }
        }
        centers.push(best);
    }
    centers.sort_unstable();
    centers
}

fn packing_lower_bound(space: &FiniteMetricSpace, eps: f64) -> usize {
    let mut chosen: Vec<usize> = Vec::new();
    for p in 0..space.len() {
        if chosen.iter().all(|&c| space.d(c, p) > 2.0 * eps * (1.0 + DEFAULT_TOL)) {
            chosen.push(p);
        }
    }
    chosen.len()
}

/// A map from the points of a finite space into the same space.
///
/// `table[i]` is the image of point `i`, or `None` when `i` is outside the
/// map's domain. A map with every entry present is a total self-map; anything
/// else is a sampled restriction.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SelfMap {
    #[serde(rename = "image")]
    table: Vec<Option<PointId>>,
}

impl SelfMap {
    pub fn new(image: Vec<usize>) -> Self {
        Self {
            table: image.into_iter().map(|i| Some(PointId(i))).collect(),
        }
    }

    /// Map defined on part of an `n`-point space.
    pub fn restricted(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut table = vec![None; n];
        for (x, y) in pairs {
            table[x] = Some(PointId(y));
        }
        Self { table }
    }

    /// Total self-map from a rule; fails if the rule leaves the set.
    pub fn from_rule(n: usize, rule: impl Fn(usize) -> Option<usize>) -> Result<Self> {
        let table = (0..n)
            .map(|i| match rule(i) {
                Some(j) if j < n => Ok(Some(PointId(j))),
                _ => Err(Error::NotSelfMap(PointId(i))),
            })
            .collect::<Result<_>>()?;
        Ok(Self { table })
    }

    pub fn identity(n: usize) -> Self {
        Self::new((0..n).collect())
    }

    pub fn constant(n: usize, c: usize) -> Self {
        Self::new(vec![c; n])
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn is_total(&self) -> bool {
        self.table.iter().all(Option::is_some)
    }

    pub fn apply(&self, x: PointId) -> Option<PointId> {
        self.table.get(x.0).copied().flatten()
    }

    pub fn domain(&self) -> impl Iterator<Item = PointId> + '_ {
        self.table.iter().enumerate().filter(|(_, y)| y.is_some()).map(|(i, _)| PointId(i))
    }

    /// `(x, Tx)` for every `x` in the domain.
    pub fn graph(&self) -> impl Iterator<Item = (PointId, PointId)> + '_ {
        self.table.iter().enumerate().filter_map(|(i, y)| y.map(|y| (PointId(i), y)))
    }

    /// Image table of a total map.
    pub fn images(&self) -> Option<Vec<usize>> {
        self.table.iter().map(|y| y.map(|p| p.0)).collect()
    }

    /// Check that this map fits `space`.
    pub fn check_against(&self, space: &FiniteMetricSpace) -> Result<()> {
        if self.len() != space.len() {
            return Err(Error::MapLength {
                map: self.len(),
                space: space.len(),
            });
        }
        for (x, y) in self.graph() {
            if y.0 >= space.len() {
                return Err(Error::ImageOutOfRange {
                    from: x.0,
                    to: y.0,
                    len: space.len(),
                });
            }
        }
        Ok(())
    }

    pub fn require_total(&self) -> Result<()> {
        match self.table.iter().position(Option::is_none) {
            Some(i) => Err(Error::NotSelfMap(PointId(i))),
            None => Ok(()),
        }
    }

    /// `Tⁿx`; fails if the orbit leaves the domain.
    pub fn iterate(&self, x: PointId, n: u64) -> Result<PointId> {
        let mut p = x;
        for step in 0..n {
            p = self.apply(p).ok_or(Error::LeftDomain { step, point: p })?;
        }
        Ok(p)
    }

    /// `self ∘ other` on the points where both are defined.
    pub fn compose(&self, other: &SelfMap) -> SelfMap {
        Self {
            table: other.table.iter().map(|y| y.and_then(|y| self.apply(y))).collect(),
        }
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.len()];
        self.graph().all(|(_, y)| y.0 < seen.len() && !std::mem::replace(&mut seen[y.0], true))
    }
}

/// `Tⁿx` for a finite self-map.
pub fn iterate(map: &SelfMap, x: PointId, n: u64) -> Result<PointId> {
    map.iterate(x, n)
}

/// A map on some point type, paired with the metric used to measure returns.
pub trait Dynamics {
    type Point: Clone;

    /// Image of `p`, or `None` when `p` is outside the domain.
    fn step(&self, p: &Self::Point) -> Option<Self::Point>;

    fn distance(&self, a: &Self::Point, b: &Self::Point) -> f64;
}

/// A finite space together with a self-map on it.
#[derive(Clone, Copy, Debug)]
pub struct FiniteSystem<'a> {
    pub space: &'a FiniteMetricSpace,
    pub map: &'a SelfMap,
}

impl Dynamics for FiniteSystem<'_> {
    type Point = PointId;

    fn step(&self, p: &PointId) -> Option<PointId> {
        self.map.apply(*p)
    }

    fn distance(&self, a: &PointId, b: &PointId) -> f64 {
        self.space.distance(*a, *b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(rows: Vec<Vec<f64>>) -> FiniteMetricSpace {
        FiniteMetricSpace::new(default_labels(rows.len()), rows).unwrap()
    }

    #[test]
    fn two_point_space_is_valid() {
        let s = space(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!(validate_metric(&s, DEFAULT_TOL).violations.is_empty());
    }

    #[test]
    fn broken_triangle_is_reported_with_witness() {
        let s = space(vec![vec![0.0, 1.0, 3.0], vec![1.0, 0.0, 1.0], vec![3.0, 1.0, 0.0]]);
        let r = validate_metric(&s, DEFAULT_TOL);
        assert!(!r.valid);
        assert!(r.violations.iter().all(|v| v.code == ViolationCode::Triangle));
        assert!(r.violations.contains(&Violation {
            code: ViolationCode::Triangle,
            points: vec![0, 1, 2]
        }));
    }

    #[test]
    fn degenerate_triangle_is_allowed() {
        // all six ordered triples: 3 ≤ 1 + 2, 2 ≤ 1 + 3, 1 ≤ 2 + 3
        let s = space(vec![vec![0.0, 1.0, 3.0], vec![1.0, 0.0, 2.0], vec![3.0, 2.0, 0.0]]);
        assert!(validate_metric(&s, DEFAULT_TOL).valid);
        let e = FiniteMetricSpace::from_integers(&[0, 1, 3]);
        assert!(validate_metric(&e, 0.0).valid);
    }

    #[test]
    fn other_axiom_codes() {
        let s = space(vec![vec![0.5, 1.0], vec![2.0, 0.0]]);
        let codes: Vec<_> = validate_metric(&s, DEFAULT_TOL).violations.iter().map(|v| v.code).collect();
        assert!(codes.contains(&ViolationCode::NonzeroDiagonal));
        assert!(codes.contains(&ViolationCode::Asymmetric));
        let z = space(vec![vec![0.0, 0.0], vec![0.0, 0.0]]);
        assert_eq!(validate_metric(&z, DEFAULT_TOL).violations[0].code, ViolationCode::NonPositive);
        let nan = space(vec![vec![0.0, f64::NAN], vec![f64::NAN, 0.0]]);
        assert_eq!(validate_metric(&nan, DEFAULT_TOL).violations[0].code, ViolationCode::NonFinite);
    }

    #[test]
    fn dimension_mismatch_is_structural() {
        let e = FiniteMetricSpace::new(default_labels(2), vec![vec![0.0, 1.0], vec![1.0]]);
        assert!(matches!(e, Err(Error::DimensionMismatch(_))));
        let e = FiniteMetricSpace::new(default_labels(3), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!(matches!(e, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn diameter_cases() {
        assert_eq!(diameter(&space(vec![vec![0.0, 1.0], vec![1.0, 0.0]])).unwrap(), 1.0);
        assert_eq!(diameter(&space(vec![vec![0.0]])).unwrap(), 0.0);
        assert_eq!(diameter(&FiniteMetricSpace::from_fn(0, |_, _| 1.0)), Err(Error::EmptySpace));
        let e = FiniteMetricSpace::from_integers(&[0, 1, 4]);
        assert_eq!(exact_diameter(&e).unwrap(), Some(Exact::from_integer(4)));
    }

    #[test]
    fn net_with_large_epsilon_is_one_point() {
        let s = FiniteMetricSpace::from_integers(&[0, 1, 4, 13]);
        let net = min_epsilon_net(&s, 13.0).unwrap();
        assert_eq!(net.size(), 1);
        assert!(net.optimal);
    }

    #[test]
    fn net_exact_search_beats_greedy_trap() {
        // points 0..6 on a line, eps 1: optimum {1, 4} or similar has size 2
        let s = FiniteMetricSpace::from_integers(&[0, 1, 2, 3, 4, 5]);
        let net = min_epsilon_net(&s, 1.0).unwrap();
        assert_eq!(net.size(), 2);
        assert_eq!(net.lower_bound, 2);
        assert!(min_epsilon_net(&s, 0.0).is_err());
    }

    #[test]
    fn net_covers_space() {
        let pts: Vec<i64> = (0..25).map(|k| k * k % 37).collect();
        let s = FiniteMetricSpace::from_integers(&pts);
        for eps in [1.0, 2.5, 7.0] {
            let net = min_epsilon_net(&s, eps).unwrap();
            assert!(!net.optimal || net.size() == net.lower_bound);
            assert!(net.lower_bound <= net.size());
            for p in s.points() {
                assert!(net.centers.iter().any(|c| s.distance(*c, p) <= eps));
            }
        }
    }

    #[test]
    fn iterate_cases() {
        let id = SelfMap::identity(4);
        assert_eq!(iterate(&id, PointId(2), 10).unwrap(), PointId(2));
        let cycle = SelfMap::new(vec![1, 2, 0]);
        for x in 0..3 {
            assert_eq!(iterate(&cycle, PointId(x), 3).unwrap(), PointId(x));
            assert_eq!(iterate(&cycle, PointId(x), 0).unwrap(), PointId(x));
        }
        let partial = SelfMap::restricted(3, [(0, 1), (1, 2)]);
        assert_eq!(partial.iterate(PointId(0), 2).unwrap(), PointId(2));
        assert_eq!(
            partial.iterate(PointId(0), 3),
            Err(Error::LeftDomain {
                step: 2,
                point: PointId(2)
            })
        );
    }

    #[test]
    fn rules_that_leave_the_set_are_rejected() {
        let vals = [0i64, 1, 2];
        let r = SelfMap::from_rule(3, |i| vals.iter().position(|&v| v == 2 * vals[i]));
        assert_eq!(r, Err(Error::NotSelfMap(PointId(2))));
    }

    #[test]
    fn document_round_trip_keeps_exact_values() {
        let json = r#"{"labels":["a","b","c"],"dist":[[0,"1/2",1],["1/2",0,"1/2"],[1,"1/2",0]],"exact":true}"#;
        let doc: SpaceDocument = serde_json::from_str(json).unwrap();
        let s = FiniteMetricSpace::try_from(doc).unwrap();
        assert!(s.is_exact());
        assert_eq!(s.exact_distance(PointId(0), PointId(1)), Some(Exact::new(1, 2)));
        let back = FiniteMetricSpace::try_from(SpaceDocument::from(&s)).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn map_document_uses_null_for_points_outside_domain() {
        let m: SelfMap = serde_json::from_str(r#"{"image":[1,null,0]}"#).unwrap();
        assert!(!m.is_total());
        assert_eq!(m.apply(PointId(0)), Some(PointId(1)));
        assert_eq!(serde_json::to_string(&m).unwrap(), r#"{"image":[1,null,0]}"#);
    }
}
