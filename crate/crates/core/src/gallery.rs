//! Closed-form example spaces and maps: finitely supported sequences under
//! the sup metric, the unit-norm family `f_n = √n·χ[0, 1/n]` in `L₂(0, ∞)`
//! (through its distance formula only), the real line under the standard and
//! the bounded metric, and rotation of the complex plane.
//!
//! Finite samples can never certify that an infimum of ratios equals 1, so the
//! two families that are strict expansions without being anticontractions get
//! their verdict from a limit check on the growth ratio instead.

use std::fmt;

use num_traits::Signed;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::expansion::{classify_detailed, ExpansionClass};
use crate::metric::{Exact, FiniteMetricSpace, SelfMap, DEFAULT_TOL};

/// A sequence with finitely many nonzero terms; trailing zeros are dropped.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SeqPoint<T> {
    coords: Vec<T>,
}

impl<T: Signed + Copy + PartialOrd> SeqPoint<T> {
    pub fn new(mut coords: Vec<T>) -> Self {
        while coords.last().is_some_and(|c| c.is_zero()) {
            coords.pop();
        }
        Self { coords }
    }

    pub fn zero() -> Self {
        Self { coords: Vec::new() }
    }

    /// `value` at (1-based) position `k`, zero elsewhere.
    pub fn basis(k: usize, value: T) -> Self {
        let mut coords = vec![T::zero(); k];
        coords[k - 1] = value;
        Self::new(coords)
    }

    /// Coordinate at 1-based position `k`.
    pub fn get(&self, k: usize) -> T {
        self.coords.get(k.wrapping_sub(1)).copied().unwrap_or_else(T::zero)
    }

    pub fn support_len(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }
}

impl<T: fmt::Debug> fmt::Debug for SeqPoint<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for c in &self.coords {
            write!(f, "{c:?}, ")?;
        }
        write!(f, "0, …)")
    }
}

/// `sup_k |x_k − y_k|`.
pub fn sup_distance<T: Signed + Copy + PartialOrd>(x: &SeqPoint<T>, y: &SeqPoint<T>) -> T {
    let len = x.support_len().max(y.support_len());
    (1..=len)
        .map(|k| (x.get(k) - y.get(k)).abs())
        .fold(T::zero(), |m, d| if d > m { d } else { m })
}

/// `(x₁, x₂, …) ↦ (0, x₁, x₂, …)`.
pub fn right_shift<T: Signed + Copy + PartialOrd>(x: &SeqPoint<T>) -> SeqPoint<T> {
    if x.coords.is_empty() {
        return SeqPoint::zero();
    }
    let mut coords = Vec::with_capacity(x.coords.len() + 1);
    coords.push(T::zero());
    coords.extend_from_slice(&x.coords);
    SeqPoint::new(coords)
}

/// `(x₁, x₂, …) ↦ (x₁, x₁², x₂, x₂², …)`.
pub fn interleave_square<T: Signed + Copy + PartialOrd>(x: &SeqPoint<T>) -> SeqPoint<T> {
    SeqPoint::new(x.coords.iter().flat_map(|&c| [c, c * c]).collect())
}

/// `x_k = (1 + 1/k)·e_k`, the `k`-th point of the set on which only the
/// identity is expansive.
pub fn counterexample_point(k: usize) -> SeqPoint<Exact> {
    let k = k as i64;
    SeqPoint::basis(k as usize, Exact::new(k + 1, k))
}

/// The points `x₁ … x_n` as an exact finite space under the sup metric.
pub fn counterexample_space(n: usize) -> FiniteMetricSpace {
    let pts: Vec<_> = (1..=n).map(counterexample_point).collect();
    sample_space(&pts)
}

/// Exact finite space over distinct sequence points.
pub fn sample_space(points: &[SeqPoint<Exact>]) -> FiniteMetricSpace {
    FiniteMetricSpace::from_fn_exact(points.len(), |i, j| sup_distance(&points[i], &points[j]))
        .with_labels(points.iter().map(|p| format!("{p:?}")).collect())
        .expect("one label per point")
}

/// Restriction of a sequence map to `domain`, inside the finite space spanned
/// by the domain and its image.
pub fn sampled_map(
    domain: &[SeqPoint<Exact>],
    map: impl Fn(&SeqPoint<Exact>) -> SeqPoint<Exact>,
) -> (FiniteMetricSpace, SelfMap) {
    let mut points: Vec<SeqPoint<Exact>> = domain.to_vec();
    let mut pairs = Vec::new();
    for (i, x) in domain.iter().enumerate() {
        let y = map(x);
        let j = match points.iter().position(|p| *p == y) {
            Some(j) => j,
            None => {
                points.push(y);
                points.len() - 1
            }
        };
        pairs.push((i, j));
    }
    let space = sample_space(&points);
    let n = points.len();
    (space, SelfMap::restricted(n, pairs))
}

/// Index of a member of the family `f_n = √n·χ[0, 1/n]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ChiFamilyIndex(u128);

impl ChiFamilyIndex {
    pub fn new(n: u128) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("family index must be at least 1".into()));
        }
        Ok(Self(n))
    }

    pub fn get(self) -> u128 {
        self.0
    }
}

/// `‖f_m − f_n‖₂ = (2 − 2√(min/max))^{1/2}`.
pub fn chi_distance(m: ChiFamilyIndex, n: ChiFamilyIndex) -> f64 {
    if m == n {
        return 0.0;
    }
    let (lo, hi) = if m < n { (m.0, n.0) } else { (n.0, m.0) };
    let q = lo as f64 / hi as f64;
    (2.0 - 2.0 * q.sqrt()).max(0.0).sqrt()
}

/// `f_n ↦ f_{kn}`.
pub fn chi_scale_map(k: u128, n: ChiFamilyIndex) -> ChiFamilyIndex {
    ChiFamilyIndex(k * n.0)
}

/// `f_n ↦ f_{n²}`.
pub fn chi_square_map(n: ChiFamilyIndex) -> ChiFamilyIndex {
    ChiFamilyIndex(n.0 * n.0)
}

/// Growth ratio of the square map on the pair `(f_{n²}, f_n)`.
pub fn chi_square_growth_ratio(n: u128) -> f64 {
    let a = ChiFamilyIndex(n * n);
    let b = ChiFamilyIndex(n);
    chi_distance(chi_square_map(a), chi_square_map(b)) / chi_distance(a, b)
}

/// Finite space over family members, with a map on indices restricted to them.
pub fn chi_sample(indices: &[u128], map: impl Fn(u128) -> u128) -> (FiniteMetricSpace, SelfMap) {
    let mut points: Vec<u128> = indices.to_vec();
    let mut pairs = Vec::new();
    for (i, &n) in indices.iter().enumerate() {
        let y = map(n);
        let j = points.iter().position(|&p| p == y).unwrap_or_else(|| {
            points.push(y);
            points.len() - 1
        });
        pairs.push((i, j));
    }
    let space = FiniteMetricSpace::from_fn(points.len(), |i, j| {
        chi_distance(ChiFamilyIndex(points[i]), ChiFamilyIndex(points[j]))
    })
    .with_labels(points.iter().map(|n| format!("f_{n}")).collect())
    .expect("one label per point");
    let n = points.len();
    (space, SelfMap::restricted(n, pairs))
}

/// Real sample points and a rule on them, inside the finite space spanned by
/// the sample and its image under the metric `d`.
pub fn real_sample(xs: &[f64], rule: impl Fn(f64) -> f64, d: fn(f64, f64) -> f64) -> (FiniteMetricSpace, SelfMap) {
    let mut points = xs.to_vec();
    let mut pairs = Vec::new();
    for (i, &x) in xs.iter().enumerate() {
        let y = rule(x);
        let j = points.iter().position(|&p| p == y).unwrap_or_else(|| {
            points.push(y);
            points.len() - 1
        });
        pairs.push((i, j));
    }
    let space = FiniteMetricSpace::from_points(&points, |a, b| d(*a, *b));
    let n = points.len();
    (space, SelfMap::restricted(n, pairs))
}

/// `ρ(x, y) = |x − y| / (|x − y| + 1)`.
pub fn bounded_metric(x: f64, y: f64) -> f64 {
    let d = (x - y).abs();
    d / (d + 1.0)
}

/// `ρ(2x, 0) / ρ(x, 0)`: growth of the doubling map under the bounded metric.
pub fn bounded_doubling_ratio(x: f64) -> f64 {
    bounded_metric(2.0 * x, 0.0) / bounded_metric(x, 0.0)
}

/// `z ↦ e^{i}·z` on the complex plane, as `(re, im)` pairs.
pub fn rotate_plane(z: (f64, f64)) -> (f64, f64) {
    let (s, c) = 1f64.sin_cos();
    (c * z.0 - s * z.1, s * z.0 + c * z.1)
}

/// Evidence that a sequence of growth ratios decreases to 1.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitCheck {
    pub samples: usize,
    pub first: (f64, f64),
    pub last: (f64, f64),
    pub strictly_decreasing: bool,
    pub all_above_one: bool,
    /// `max (r − 1)·√arg` over the samples, i.e. the smallest `C` with
    /// `r − 1 ≤ C/√arg`.
    pub fitted_c: f64,
}

impl LimitCheck {
    fn from_samples(points: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let pts: Vec<(f64, f64)> = points.into_iter().collect();
        let strictly_decreasing = pts.windows(2).all(|w| w[1].1 < w[0].1);
        let all_above_one = pts.iter().all(|p| p.1 > 1.0);
        let fitted_c = pts.iter().map(|(a, r)| (r - 1.0) * a.sqrt()).fold(0.0, f64::max);
        Self {
            samples: pts.len(),
            first: pts[0],
            last: *pts.last().unwrap(),
            strictly_decreasing,
            all_above_one,
            fitted_c,
        }
    }

    /// Decreasing, above 1, and within `gap` of 1 at the last sample.
    pub fn tends_to_one(&self, gap: f64) -> bool {
        self.strictly_decreasing && self.all_above_one && self.last.1 - 1.0 <= gap
    }
}

/// Square-map growth ratios on the pairs `(f_{n²}, f_n)`, `n = 2..=max_n`.
pub fn chi_square_limit(max_n: u128) -> LimitCheck {
    LimitCheck::from_samples((2..=max_n.max(3)).map(|n| (n as f64, chi_square_growth_ratio(n))))
}

/// Doubling-map growth ratios under the bounded metric on a geometric grid of
/// `x` in `[1, max_x]`.
pub fn bounded_doubling_limit(max_x: f64) -> LimitCheck {
    let steps = (max_x.max(2.0).log10() * 20.0).ceil() as i32;
    let grid = (0..=steps).map(|k| 10f64.powf(k as f64 / 20.0).min(max_x.max(2.0)));
    let mut xs: Vec<f64> = grid.collect();
    xs.dedup();
    LimitCheck::from_samples(xs.into_iter().map(|x| (x, bounded_doubling_ratio(x))))
}

/// Names accepted by [`run`].
pub const ENTRIES: &[(&str, &str)] = &[
    ("rotation", "rotation of the complex plane by one radian is an isometry, not a proper expansion"),
    ("right-shift", "the right shift on sequences under the sup metric is an isometry"),
    ("interleave-square", "(x1, x1^2, x2, x2^2, ...) is a proper expansion that is not strict"),
    ("chi-scale", "f_n -> f_kn is an isometry of the family sqrt(n)*chi[0,1/n]"),
    ("chi-square", "f_n -> f_{n^2} is a strict expansion but not an anticontraction"),
    ("doubling", "x -> 2x on the real line is an anticontraction with E = 2"),
    ("doubling-bounded", "x -> 2x under |x-y|/(|x-y|+1) is strict but not an anticontraction"),
    ("counterexample", "on {(1 + 1/n) e_n} under the sup metric the only expansion is the identity"),
];

fn class_json(space: &FiniteMetricSpace, map: &SelfMap) -> Result<(Value, ExpansionClass)> {
    let c = classify_detailed(space, map, DEFAULT_TOL)?;
    Ok((serde_json::to_value(&c).expect("serializable"), c.class))
}

/// Run a gallery entry on samples of size governed by `max_n`.
pub fn run(name: &str, max_n: u64) -> Result<Value> {
    let max_n = max_n.max(3);
    let report = match name {
        "rotation" => {
            let pts: Vec<(f64, f64)> = (0..max_n.min(200))
                .map(|k| {
                    let k = k as f64;
                    (k.cos() * (1.0 + k / 7.0), (0.3 * k).sin() * k / 3.0)
                })
                .collect();
            let mut all = pts.clone();
            all.extend(pts.iter().map(|&z| rotate_plane(z)));
            let n = pts.len();
            let space = FiniteMetricSpace::from_points(&all, |a, b| (a.0 - b.0).hypot(a.1 - b.1));
            let map = SelfMap::restricted(2 * n, (0..n).map(|i| (i, n + i)));
            let (c, class) = class_json(&space, &map)?;
            json!({ "classification": c, "verdict": class.name() })
        }
        "right-shift" | "interleave-square" => {
            let half = Exact::new(1, 2);
            let witnesses = [
                SeqPoint::new(vec![Exact::from_integer(1)]),
                SeqPoint::new(vec![half]),
                SeqPoint::zero(),
            ];
            let mut sample: Vec<SeqPoint<Exact>> = witnesses.to_vec();
            // extra points with coordinates in [-1, 1]
            for k in 1..max_n.min(12) as i64 {
                sample.push(SeqPoint::new(vec![Exact::new(k % 5 - 2, 3), Exact::new(1 - k % 3, 2), Exact::new(k, 13)]));
            }
            let f: fn(&SeqPoint<Exact>) -> SeqPoint<Exact> =
                if name == "right-shift" { right_shift } else { interleave_square };
            let (ws, wm) = sampled_map(&witnesses, f);
            let (ss, sm) = sampled_map(&sample, f);
            let (wc, wclass) = class_json(&ws, &wm)?;
            let (sc, _) = class_json(&ss, &sm)?;
            json!({
                "witness_points": witnesses.iter().map(|p| format!("{p:?}")).collect::<Vec<_>>(),
                "witness_classification": wc,
                "sample_classification": sc,
                "verdict": wclass.name(),
            })
        }
        "chi-scale" => {
            let indices: Vec<u128> = (1..=max_n.min(50) as u128).collect();
            let (space, map) = chi_sample(&indices, |n| 3 * n);
            let (c, class) = class_json(&space, &map)?;
            json!({ "k": 3, "classification": c, "verdict": class.name() })
        }
        "chi-square" => {
            let indices: Vec<u128> = (1..=max_n.min(30) as u128).collect();
            let (space, map) = chi_sample(&indices, |n| n * n);
            let (c, class) = class_json(&space, &map)?;
            let limit = chi_square_limit(max_n as u128);
            let verdict = if class.is_expansive() && limit.tends_to_one(1.0) {
                "StrictNotAnticontraction"
            } else {
                class.name()
            };
            json!({ "sample_classification": c, "limit": limit, "verdict": verdict })
        }
        "doubling" | "doubling-bounded" => {
            let xs: Vec<f64> = (0..max_n.min(40) as i64).map(|k| (k - 20) as f64).collect();
            let d: fn(f64, f64) -> f64 = if name == "doubling" { |a, b| (a - b).abs() } else { bounded_metric };
            let (space, map) = real_sample(&xs, |x| 2.0 * x, d);
            let (c, class) = class_json(&space, &map)?;
            if name == "doubling" {
                json!({ "sample_classification": c, "verdict": class.name() })
            } else {
                let limit = bounded_doubling_limit(max_n as f64);
                let verdict = if class.is_expansive() && limit.tends_to_one(1.0) {
                    "StrictNotAnticontraction"
                } else {
                    class.name()
                };
                json!({ "sample_classification": c, "limit": limit, "verdict": verdict })
            }
        }
        "counterexample" => {
            let n = max_n.min(7) as usize;
            let r = crate::harness::verify_counterexample(n, &Default::default())?;
            let verdict = if r.only_identity {
                "OnlyIdentity"
            } else if r.extendable_only_identity {
                "OnlyIdentityAmongExtendable"
            } else {
                "Other"
            };
            json!({ "report": r, "verdict": verdict })
        }
        other => return Err(Error::InvalidArgument(format!("unknown gallery entry {other:?}"))),
    };
    Ok(json!({ "entry": name, "max_n": max_n, "result": report }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn q(p: i64, d: i64) -> Exact {
        Exact::new(p, d)
    }

    fn seq(v: &[Exact]) -> SeqPoint<Exact> {
        SeqPoint::new(v.to_vec())
    }

    #[test]
    fn sup_distance_values() {
        let x = seq(&[q(1, 1)]);
        let y = seq(&[q(1, 2)]);
        assert_eq!(sup_distance(&x, &y), q(1, 2));
        assert_eq!(sup_distance(&x, &x), q(0, 1));
        assert_eq!(sup_distance(&counterexample_point(2), &counterexample_point(4)), q(3, 2));
    }

    #[test]
    fn right_shift_values() {
        let x = seq(&[q(1, 1)]);
        assert_eq!(right_shift(&x), seq(&[q(0, 1), q(1, 1)]));
        assert_eq!(right_shift(&SeqPoint::<Exact>::zero()), SeqPoint::zero());
        let y = seq(&[q(1, 3), q(-2, 1)]);
        assert_eq!(sup_distance(&right_shift(&x), &right_shift(&y)), sup_distance(&x, &y));
    }

    #[test]
    fn interleave_square_witnesses() {
        let x = seq(&[q(1, 1)]);
        let y = seq(&[q(1, 2)]);
        let z = SeqPoint::<Exact>::zero();
        assert_eq!(sup_distance(&interleave_square(&x), &interleave_square(&y)), q(3, 4));
        assert_eq!(sup_distance(&interleave_square(&x), &interleave_square(&z)), q(1, 1));
        assert_eq!(interleave_square(&z), z);
        let (space, map) = sampled_map(&[x, y, z], interleave_square);
        let c = crate::expansion::classify(&space, &map, 0.0).unwrap();
        match c {
            ExpansionClass::ProperNotStrict { strict, equality } => {
                assert_eq!((strict.d_txty, strict.d_xy), (0.75, 0.5));
                assert_eq!((equality.d_txty, equality.d_xy), (1.0, 1.0));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    /// Midpoint-rule quadrature of ∫|f_n − f_m|² on (0, 1], independent of the
    /// closed form. The integrand is piecewise constant with breaks at 1/n and
    /// 1/m, so the cells are aligned to them.
    fn chi_quadrature(m: u128, n: u128) -> f64 {
        let f = |k: u128, x: f64| if x <= 1.0 / k as f64 { (k as f64).sqrt() } else { 0.0 };
        let breaks = [0.0, 1.0 / n.max(m) as f64, 1.0 / n.min(m) as f64];
        let mut total = 0.0;
        for w in breaks.windows(2) {
            let cells = 64;
            let h = (w[1] - w[0]) / cells as f64;
            for c in 0..cells {
                let x = w[0] + (c as f64 + 0.5) * h;
                total += (f(n, x) - f(m, x)).powi(2) * h;
            }
        }
        total.sqrt()
    }

    #[test]
    fn chi_distance_values() {
        let i = |n| ChiFamilyIndex::new(n).unwrap();
        assert!(close(chi_distance(i(1), i(4)), 1.0, 1e-15));
        assert!(close(chi_distance(i(1), i(100)), 1.8f64.sqrt(), 1e-15));
        assert!(close(chi_distance(i(1), i(100)), 1.341640786499874, 1e-12));
        assert_eq!(chi_distance(i(7), i(7)), 0.0);
        assert!(ChiFamilyIndex::new(0).is_err());
        assert!(close(chi_quadrature(1, 4), 1.0, 1e-12));
    }

    #[test]
    fn chi_maps() {
        let i = |n| ChiFamilyIndex::new(n).unwrap();
        assert_eq!(chi_distance(chi_scale_map(3, i(1)), chi_scale_map(3, i(4))), 1.0);
        assert_eq!(chi_scale_map(1, i(9)), i(9));
        // (1, 4) ↦ (1, 16): 1 → √1.5
        let grown = chi_distance(chi_square_map(i(1)), chi_square_map(i(4)));
        assert!(close(grown, 1.5f64.sqrt(), 1e-15) && grown > 1.0);
        let r100 = chi_square_growth_ratio(100);
        assert!(close(r100, (1.98f64 / 1.8).sqrt(), 1e-12));
        assert!(close(r100, 1.0488088481701516, 1e-9));
        assert!(chi_square_growth_ratio(101) < r100);
    }

    #[test]
    fn bounded_metric_values() {
        assert!(close(bounded_doubling_ratio(1.0), 4.0 / 3.0, 1e-15));
        assert_eq!(bounded_metric(3.5, 3.5), 0.0);
        let r = bounded_doubling_ratio(1e6);
        assert!(close(r, 1.0000005, 1e-9) && r > 1.0);
        let l = bounded_doubling_limit(1e6);
        assert!(l.tends_to_one(1e-6));
    }

    #[test]
    fn gallery_entries_run() {
        for (name, _) in ENTRIES {
            let v = run(name, 20).unwrap();
            assert_eq!(v["entry"], *name);
        }
        let verdict = |n: &str| run(n, 200).unwrap()["result"]["verdict"].as_str().unwrap().to_string();
        assert_eq!(verdict("rotation"), "Isometry");
        assert_eq!(verdict("right-shift"), "Isometry");
        assert_eq!(verdict("interleave-square"), "ProperNotStrict");
        assert_eq!(verdict("chi-scale"), "Isometry");
        assert_eq!(verdict("chi-square"), "StrictNotAnticontraction");
        assert_eq!(verdict("doubling"), "Anticontraction");
        assert_eq!(verdict("doubling-bounded"), "StrictNotAnticontraction");
        assert_eq!(verdict("counterexample"), "OnlyIdentityAmongExtendable");
        assert!(run("nope", 3).is_err());
    }
}
