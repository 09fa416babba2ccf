//! Sparse sets in unbounded spaces.
//!
//! Scanning a point generator, accept the first point whose distance to every
//! accepted point exceeds `multiplier` times the diameter of what has been
//! accepted so far. On the resulting `x₁, x₂, …` the shift `x_k ↦ x_{k+1}`
//! multiplies every distance by more than `multiplier`. A bounded space
//! cannot feed the scan forever; running out of budget is reported, not
//! treated as proof of boundedness.

use std::fmt::Debug;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::{cmp_rel, FiniteMetricSpace, SelfMap, DEFAULT_TOL};

/// Lazily sampled metric space.
pub trait MetricOracle {
    type Point: Clone + Debug + Serialize;

    fn name(&self) -> String;

    fn point_at(&self, k: u64) -> Self::Point;

    fn distance(&self, a: &Self::Point, b: &Self::Point) -> f64;

    /// Distances are computed without rounding.
    fn is_exact(&self) -> bool {
        false
    }
}

/// `k ↦ k` on the real line.
#[derive(Clone, Copy, Debug, Default)]
pub struct IntegerLine;

impl MetricOracle for IntegerLine {
    type Point = i64;

    fn name(&self) -> String {
        "integer-line".into()
    }

    fn point_at(&self, k: u64) -> i64 {
        k as i64
    }

    fn distance(&self, a: &i64, b: &i64) -> f64 {
        (a - b).unsigned_abs() as f64
    }

    fn is_exact(&self) -> bool {
        true
    }
}

/// `scale·ℤ²` under the sup metric, listed in square rings around the origin.
#[derive(Clone, Copy, Debug)]
pub struct SupLattice {
    pub scale: f64,
}

impl Default for SupLattice {
    fn default() -> Self {
        Self { scale: 1.0 }
    }
}

/// The `k`-th lattice point of the outward square spiral.
pub fn spiral_point(k: u64) -> (i64, i64) {
    if k == 0 {
        return (0, 0);
    }
    // ring r holds indices (2r−1)² .. (2r+1)²
    let mut r = (((k as f64).sqrt() + 1.0) / 2.0).floor() as u64;
    while (2 * r + 1) * (2 * r + 1) <= k {
        r += 1;
    }
    while r > 0 && (2 * r - 1) * (2 * r - 1) > k {
        r -= 1;
    }
    let j = (k - (2 * r - 1) * (2 * r - 1)) as i64;
    let r = r as i64;
    let (side, t) = (j / (2 * r), j % (2 * r));
    match side {
        0 => (r, -r + 1 + t),
        1 => (r - 1 - t, r),
        2 => (-r, r - 1 - t),
        _ => (-r + 1 + t, -r),
    }
}

impl MetricOracle for SupLattice {
    type Point = (i64, i64);

    fn name(&self) -> String {
        format!("sup-lattice(scale={})", self.scale)
    }

    fn point_at(&self, k: u64) -> (i64, i64) {
        spiral_point(k)
    }

    fn distance(&self, a: &(i64, i64), b: &(i64, i64)) -> f64 {
        let m = (a.0 - b.0).unsigned_abs().max((a.1 - b.1).unsigned_abs());
        self.scale * m as f64
    }

    fn is_exact(&self) -> bool {
        self.scale.fract() == 0.0
    }
}

/// `k ↦ base^k` on the real line.
#[derive(Clone, Copy, Debug)]
pub struct Geometric {
    pub base: u32,
}

impl Default for Geometric {
    fn default() -> Self {
        Self { base: 3 }
    }
}

impl MetricOracle for Geometric {
    type Point = f64;

    fn name(&self) -> String {
        format!("geometric(base={})", self.base)
    }

    fn point_at(&self, k: u64) -> f64 {
        (self.base as f64).powi(k.min(i32::MAX as u64) as i32)
    }

    fn distance(&self, a: &f64, b: &f64) -> f64 {
        (a - b).abs()
    }
}

/// Fractional parts of `k·φ`: a bounded sequence filling `[0, 1]`.
#[derive(Clone, Copy, Debug, Default)]
pub struct BoundedInterval;

impl MetricOracle for BoundedInterval {
    type Point = f64;

    fn name(&self) -> String {
        "bounded-interval".into()
    }

    fn point_at(&self, k: u64) -> f64 {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        (k as f64 * phi).fract()
    }

    fn distance(&self, a: &f64, b: &f64) -> f64 {
        (a - b).abs()
    }
}

/// Dial points `e^{ik}` on the unit circle, with chord distance.
#[derive(Clone, Copy, Debug, Default)]
pub struct DialOracle;

impl MetricOracle for DialOracle {
    type Point = (f64, f64);

    fn name(&self) -> String {
        "dial".into()
    }

    fn point_at(&self, k: u64) -> (f64, f64) {
        crate::dial::dial_point(k).coords
    }

    fn distance(&self, a: &(f64, f64), b: &(f64, f64)) -> f64 {
        (a.0 - b.0).hypot(a.1 - b.1)
    }
}

/// Built-in oracle names.
pub const ORACLES: [&str; 5] = ["integer-line", "sup-lattice", "geometric", "bounded-interval", "dial"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleAxiomReport {
    pub samples: u64,
    pub symmetric: bool,
    pub zero_self_distance: bool,
    pub triangle: bool,
    /// First failing triple or pair, as scan indices.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<u64>>,
}

impl OracleAxiomReport {
    pub fn holds(&self) -> bool {
        self.symmetric && self.zero_self_distance && self.triangle
    }
}

/// Spot-check the metric axioms on the first `samples` points.
pub fn check_oracle_axioms<O: MetricOracle>(oracle: &O, samples: u64, tol: f64) -> OracleAxiomReport {
    let pts: Vec<O::Point> = (0..samples).map(|k| oracle.point_at(k)).collect();
    let n = pts.len();
    let d: Vec<Vec<f64>> = pts.iter().map(|a| pts.iter().map(|b| oracle.distance(a, b)).collect()).collect();
    let mut report = OracleAxiomReport {
        samples,
        symmetric: true,
        zero_self_distance: true,
        triangle: true,
        witness: None,
    };
    for i in 0..n {
        if d[i][i] != 0.0 {
            report.zero_self_distance = false;
            report.witness.get_or_insert(vec![i as u64]);
        }
        for j in 0..n {
            if cmp_rel(d[i][j], d[j][i], tol).is_ne() {
                report.symmetric = false;
                report.witness.get_or_insert(vec![i as u64, j as u64]);
            }
            for k in 0..n {
                if cmp_rel(d[i][k], d[i][j] + d[j][k], tol).is_gt() {
                    report.triangle = false;
                    report.witness.get_or_insert(vec![i as u64, j as u64, k as u64]);
                }
            }
        }
    }
    report
}

/// Separation recorded when the `(k+1)`-th point was accepted.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeparationCertificate {
    /// Number of points accepted before this one.
    pub k: usize,
    /// `min_{i ≤ k} d(x_{k+1}, x_i)`.
    pub min_new_distance: f64,
    /// `max_{i,j ≤ k} d(x_i, x_j)`.
    pub prior_diameter: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SparseSet<P> {
    pub oracle: String,
    pub multiplier: f64,
    pub exact: bool,
    pub points: Vec<P>,
    /// Scan index of each accepted point.
    pub indices: Vec<u64>,
    pub certificates: Vec<SeparationCertificate>,
    pub requested: usize,
    pub scanned: u64,
    /// Budget ran out before `requested` points were accepted; the oracle
    /// may be bounded.
    pub failed: bool,
    #[serde(skip)]
    pub dist: Vec<Vec<f64>>,
}

impl<P> SparseSet<P> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn tol(&self) -> f64 {
        if self.exact {
            0.0
        } else {
            DEFAULT_TOL
        }
    }

    /// Recheck every stored certificate: strict separation beyond
    /// `multiplier · prior diameter`.
    pub fn certificates_hold(&self) -> bool {
        self.certificates
            .iter()
            .all(|c| c.k < 2 || exceeds(c.min_new_distance, self.multiplier * c.prior_diameter, self.tol()))
    }

    /// The accepted points as a finite space.
    pub fn space(&self) -> FiniteMetricSpace {
        FiniteMetricSpace::from_fn(self.len(), |i, j| self.dist[i][j])
    }
}

fn exceeds(a: f64, b: f64, tol: f64) -> bool {
    if tol == 0.0 {
        a > b
    } else {
        cmp_rel(a, b, tol).is_gt()
    }
}

/// Default separation multiplier.
pub const DEFAULT_MULTIPLIER: f64 = 2.0;

/// Greedy scan of `oracle.point_at(0), point_at(1), …`, accepting the first
/// point whose distance to every accepted point exceeds `multiplier` times
/// their diameter.
pub fn greedy_sparse<O: MetricOracle>(
    oracle: &O,
    count: usize,
    scan_budget: u64,
    multiplier: f64,
) -> Result<SparseSet<O::Point>> {
    if count < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: count });
    }
    if scan_budget == 0 {
        return Err(Error::InvalidArgument("scan budget must be positive".into()));
    }
    if !(multiplier >= 1.0) {
        return Err(Error::InvalidArgument(format!("multiplier must be at least 1, got {multiplier}")));
    }
    let exact = oracle.is_exact();
    let tol = if exact { 0.0 } else { DEFAULT_TOL };
    let mut set = SparseSet {
        oracle: oracle.name(),
        multiplier,
        exact,
        points: Vec::new(),
        indices: Vec::new(),
        certificates: Vec::new(),
        requested: count,
        scanned: 0,
        failed: false,
        dist: Vec::new(),
    };
    let mut diameter: f64 = 0.0;
    let mut k = 0u64;
    while set.len() < count {
        if k == scan_budget {
            set.failed = true;
            break;
        }
        let candidate = oracle.point_at(k);
        k += 1;
        let row: Vec<f64> = set.points.iter().map(|p| oracle.distance(&candidate, p)).collect();
        let nearest = row.iter().copied().fold(f64::INFINITY, f64::min);
        let accept = if set.is_empty() {
            true
        } else {
            // one accepted point: any distinct point will do
            nearest > 0.0 && (set.len() < 2 || exceeds(nearest, multiplier * diameter, tol))
        };
        if !accept {
            continue;
        }
        if !set.is_empty() {
            set.certificates.push(SeparationCertificate {
                k: set.len(),
                min_new_distance: nearest,
                prior_diameter: diameter,
            });
        }
        diameter = row.iter().copied().fold(diameter, f64::max);
        for (i, d) in row.iter().enumerate() {
            set.dist[i].push(*d);
        }
        let mut own = row;
        own.push(0.0);
        set.dist.push(own);
        set.points.push(candidate);
        set.indices.push(k - 1);
    }
    set.scanned = k;
    Ok(set)
}

/// The shift `x_k ↦ x_{k+1}` on the accepted points, with the last point
/// fixed so the map stays total.
pub fn shift_map<P>(set: &SparseSet<P>) -> Result<(FiniteMetricSpace, SelfMap)> {
    let n = set.len();
    if n < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: n });
    }
    let map = SelfMap::new((0..n).map(|k| (k + 1).min(n - 1)).collect());
    Ok((set.space(), map))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnticontractionCertificate {
    #[serde(rename = "E_achieved")]
    pub e_achieved: f64,
    /// 1-based indices `(a, b)` of the pair attaining the minimum.
    pub worst_pair: (usize, usize),
    pub pairs_checked: usize,
    pub multiplier: f64,
}

/// Minimum of `d(x_{a+1}, x_{b+1}) / d(x_a, x_b)` over interior pairs
/// `a < b < n`, which must exceed the set's multiplier.
pub fn certify_anticontraction<P>(set: &SparseSet<P>) -> Result<AnticontractionCertificate> {
    let n = set.len();
    if n < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: n });
    }
    let mut best: Option<(f64, usize, usize)> = None;
    let mut checked = 0;
    for a in 0..n - 1 {
        for b in a + 1..n - 1 {
            checked += 1;
            let ratio = set.dist[a + 1][b + 1] / set.dist[a][b];
            if !exceeds(ratio, set.multiplier, set.tol()) {
                return Err(Error::CertificateViolation(
                    a + 1,
                    b + 1,
                    format!("ratio {ratio} does not exceed {}", set.multiplier),
                ));
            }
            if best.is_none_or(|(r, _, _)| ratio < r) {
                best = Some((ratio, a + 1, b + 1));
            }
        }
    }
    let (e, a, b) = best.expect("n ≥ 3 gives an interior pair");
    Ok(AnticontractionCertificate {
        e_achieved: e,
        worst_pair: (a, b),
        pairs_checked: checked,
        multiplier: set.multiplier,
    })
}

/// `d(Tᵏx₁, Tᵏx₂) / d(x₁, x₂)` for `k = 0 … n − 2`.
pub fn iterate_growth<P>(set: &SparseSet<P>) -> Vec<f64> {
    let n = set.len();
    if n < 2 {
        return Vec::new();
    }
    (0..n - 1).map(|k| set.dist[k][k + 1] / set.dist[0][1]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    // hand simulation of the scan on 0, 1, 2, …
    fn line_oracle(count: usize) -> Vec<i64> {
        let mut acc: Vec<i64> = Vec::new();
        let mut x = 0i64;
        while acc.len() < count {
            let diam = acc.iter().max().zip(acc.iter().min()).map_or(0, |(a, b)| a - b);
            let near = acc.iter().map(|p| (x - p).abs()).min();
            let ok = match near {
                None => true,
                Some(m) if acc.len() == 1 => m > 0,
                Some(m) => m > 2 * diam,
            };
            if ok {
                acc.push(x);
            }
            x += 1;
        }
        acc
    }

    #[test]
    fn integer_line_scan() {
        let s = greedy_sparse(&IntegerLine, 4, 1000, DEFAULT_MULTIPLIER).unwrap();
        assert_eq!(s.points, vec![0, 1, 4, 13]);
        assert_eq!(s.points, line_oracle(4));
        assert!(!s.failed && s.certificates_hold());
        let long = greedy_sparse(&IntegerLine, 7, 10_000, DEFAULT_MULTIPLIER).unwrap();
        assert_eq!(long.points, line_oracle(7));
    }

    #[test]
    fn two_points_are_the_first_two_distinct() {
        let s = greedy_sparse(&BoundedInterval, 2, 10, DEFAULT_MULTIPLIER).unwrap();
        assert_eq!(s.indices, vec![0, 1]);
        assert!(greedy_sparse(&IntegerLine, 1, 10, DEFAULT_MULTIPLIER).is_err());
    }

    #[test]
    fn shift_on_line_set() {
        let s = greedy_sparse(&IntegerLine, 4, 1000, DEFAULT_MULTIPLIER).unwrap();
        let (space, map) = shift_map(&s).unwrap();
        assert_eq!(map.images(), Some(vec![1, 2, 3, 3]));
        assert_eq!(space.d(1, 2), 3.0);
        assert_eq!(space.d(2, 3), 9.0);
        assert_eq!(space.d(1, 3), 12.0);
        let cert = certify_anticontraction(&s).unwrap();
        assert_eq!(cert.e_achieved, 3.0);
        assert_eq!(cert.worst_pair, (1, 2));
        assert_eq!(cert.pairs_checked, 3);
    }

    #[test]
    fn short_sets_are_rejected() {
        let s = greedy_sparse(&IntegerLine, 2, 10, DEFAULT_MULTIPLIER).unwrap();
        assert!(matches!(shift_map(&s), Err(Error::TooFewPoints { .. })));
        assert!(matches!(certify_anticontraction(&s), Err(Error::TooFewPoints { .. })));
    }

    #[test]
    fn unbounded_oracles_certify() {
        fn run<O: MetricOracle>(o: &O) {
            let s = greedy_sparse(o, 6, 1_000_000, DEFAULT_MULTIPLIER).unwrap();
            assert!(!s.failed, "{}", o.name());
            assert!(s.certificates_hold());
            let cert = certify_anticontraction(&s).unwrap();
            assert!(cert.e_achieved > 2.0);
            for (k, g) in iterate_growth(&s).iter().enumerate() {
                assert!(*g >= 2f64.powi(k as i32), "{} k={k}", o.name());
            }
        }
        run(&IntegerLine);
        run(&SupLattice::default());
        run(&SupLattice { scale: 0.5 });
        run(&Geometric::default());
    }

    #[test]
    fn bounded_oracles_fail() {
        let s = greedy_sparse(&BoundedInterval, 3, 100_000, DEFAULT_MULTIPLIER).unwrap();
        assert!(s.failed && s.len() == 2);
        // chords reach 2, so three points fit but a fourth cannot
        let d = greedy_sparse(&DialOracle, 4, 100_000, DEFAULT_MULTIPLIER).unwrap();
        assert!(d.failed && d.len() == 3);
    }

    #[test]
    fn spiral_covers_rings() {
        let pts: Vec<_> = (0..25).map(spiral_point).collect();
        let mut sorted = pts.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 25);
        assert!(pts.iter().all(|p| p.0.abs() <= 2 && p.1.abs() <= 2));
        assert!(pts[1..9].iter().all(|p| p.0.abs().max(p.1.abs()) == 1));
    }

    #[test]
    fn oracle_axioms() {
        assert!(check_oracle_axioms(&IntegerLine, 20, DEFAULT_TOL).holds());
        assert!(check_oracle_axioms(&SupLattice::default(), 20, DEFAULT_TOL).holds());
        assert!(check_oracle_axioms(&DialOracle, 20, DEFAULT_TOL).holds());
        assert!(check_oracle_axioms(&Geometric::default(), 15, DEFAULT_TOL).holds());
    }
}
