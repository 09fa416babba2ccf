//! The dial set `{e^{in} : n = 0, 1, 2, …}` on the unit circle and the
//! rotation `e^{in} ↦ e^{i(n+1)}`.
//!
//! Angles are reduced modulo 2π with a two-term split of 2π, so the reduced
//! angle of `n` keeps about 16 significant digits for `n` up to around 10⁹.
//! Returns of the rotation close to a target are produced from the
//! continued-fraction convergents `p/q` of 2π: `e^{ip}` is within
//! `|p − 2πq| < 1/q` of `1`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expansion::{range_density, RangeDensity};
use crate::metric::{Dynamics, FiniteMetricSpace, SelfMap};

/// Leading part of 2π (the `f64` nearest to it).
pub const TWO_PI_HI: f64 = std::f64::consts::TAU;
/// `2π − TWO_PI_HI`.
pub const TWO_PI_LO: f64 = 2.449_293_598_294_706_4e-16;

/// Tolerance for points lying on the unit circle.
pub const CIRCLE_TOL: f64 = 1e-12;

/// `x mod 2π` in `[0, 2π)` for an integer-valued `x` with `|x| < 2⁵³`.
pub fn reduce_angle(x: f64) -> f64 {
    let k = (x / TWO_PI_HI).floor();
    // k·HI = p + e exactly
    let p = k * TWO_PI_HI;
    let e = k.mul_add(TWO_PI_HI, -p);
    let mut r = ((x - p) - e) - k * TWO_PI_LO;
    if r < 0.0 {
        r += TWO_PI_HI;
        r += TWO_PI_LO;
    } else if r >= TWO_PI_HI {
        r -= TWO_PI_HI;
        r -= TWO_PI_LO;
    }
    r
}

/// `x mod 2π` in `(−π, π]`.
pub fn reduce_signed(x: f64) -> f64 {
    let r = reduce_angle(x);
    if r > PI {
        (r - TWO_PI_HI) - TWO_PI_LO
    } else {
        r
    }
}

/// `|e^{im} − e^{in}| = 2·|sin((m − n)/2)|`, evaluated on the reduced difference.
pub fn index_chord(m: u64, n: u64) -> f64 {
    let diff = m as f64 - n as f64;
    2.0 * (reduce_signed(diff) / 2.0).sin().abs()
}

/// `|p − 2πq|`, with the product taken in extended precision.
pub fn two_pi_error(p: u64, q: u64) -> f64 {
    let (p, q) = (p as f64, q as f64);
    let hi = q * TWO_PI_HI;
    let hi_err = q.mul_add(TWO_PI_HI, -hi);
    ((p - hi) - hi_err - q * TWO_PI_LO).abs()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DialPoint {
    pub n: u64,
    /// `(cos n, sin n)`.
    pub coords: (f64, f64),
}

impl DialPoint {
    pub fn on_circle(&self) -> bool {
        (self.coords.0.hypot(self.coords.1) - 1.0).abs() <= CIRCLE_TOL
    }
}

/// `e^{in}`.
pub fn dial_point(n: u64) -> DialPoint {
    let (s, c) = reduce_angle(n as f64).sin_cos();
    DialPoint { n, coords: (c, s) }
}

/// Counterclockwise rotation by one radian.
pub fn rotate(p: &DialPoint) -> DialPoint {
    dial_point(p.n + 1)
}

/// Euclidean distance between the points of the plane.
pub fn chord(a: &DialPoint, b: &DialPoint) -> f64 {
    (a.coords.0 - b.coords.0).hypot(a.coords.1 - b.coords.1)
}

/// The rotation as a dynamical system on the dial set.
#[derive(Clone, Copy, Debug, Default)]
pub struct DialRotation;

impl Dynamics for DialRotation {
    type Point = DialPoint;

    fn step(&self, p: &DialPoint) -> Option<DialPoint> {
        Some(rotate(p))
    }

    fn distance(&self, a: &DialPoint, b: &DialPoint) -> f64 {
        chord(a, b)
    }
}

/// The first `count` dial points as a finite space.
pub fn dial_space(count: usize) -> FiniteMetricSpace {
    let pts: Vec<DialPoint> = (0..count as u64).map(dial_point).collect();
    FiniteMetricSpace::from_fn(count, |i, j| chord(&pts[i], &pts[j]))
        .with_labels((0..count).map(|n| format!("e^{{i{n}}}")).collect())
        .expect("one label per point")
}

/// The rotation restricted to `e^{i0} … e^{i(N−1)}`, inside the space of the
/// first `N + 1` dial points.
pub fn restricted_rotation(n_points: usize) -> (FiniteMetricSpace, SelfMap) {
    let space = dial_space(n_points + 1);
    let map = SelfMap::restricted(n_points + 1, (0..n_points).map(|i| (i, i + 1)));
    (space, map)
}

/// Whether every one of the first `n_points` dial points lies within
/// `epsilon` of the rotated points.
pub fn range_density_check(n_points: usize, epsilon: f64) -> Result<RangeDensity> {
    let (space, map) = restricted_rotation(n_points);
    range_density(&space, &map, epsilon)
}

/// Largest `|chord(Tp_m, Tp_n) − chord(p_m, p_n)|` over `m < n < n_points`.
pub fn isometry_defect(n_points: usize) -> f64 {
    let pts: Vec<(f64, f64)> = (0..=n_points as u64).map(|n| dial_point(n).coords).collect();
    let d = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).hypot(a.1 - b.1);
    let mut worst: f64 = 0.0;
    for m in 0..n_points {
        for n in m + 1..n_points {
            let before = d(pts[m], pts[n]);
            let after = d(pts[m + 1], pts[n + 1]);
            worst = worst.max((after - before).abs());
        }
    }
    worst
}

/// `min_{1 ≤ n ≤ N} |e^{in} − 1|` with its argmin: how far `e^{i0}` stays from
/// the image of the first `N` points.
pub fn nonsurjectivity_margin(n_points: u64) -> (f64, u64) {
    (1..=n_points)
        .map(|n| (chord(&dial_point(n), &dial_point(0)), n))
        .fold((f64::INFINITY, 0), |best, c| if c.0 < best.0 { c } else { best })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Convergent {
    pub p: u64,
    pub q: u64,
    /// `|x·q − p|`.
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuedFraction {
    pub x: f64,
    pub coefficients: Vec<u64>,
    pub convergents: Vec<Convergent>,
    /// Set when fewer terms than requested were produced.
    pub truncated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// Deepest expansion attempted in double precision.
pub const MAX_CF_DEPTH: usize = 40;

/// Continued-fraction coefficients of `x > 0` and their convergents.
pub fn continued_fraction(x: f64, depth: usize) -> Result<ContinuedFraction> {
    continued_fraction_with(x, depth, |p, q| (x.mul_add(q as f64, -(p as f64))).abs())
}

fn continued_fraction_with(x: f64, depth: usize, error: impl Fn(u64, u64) -> f64) -> Result<ContinuedFraction> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidArgument(format!("continued fraction needs a positive finite x, got {x}")));
    }
    if depth == 0 {
        return Err(Error::InvalidArgument("depth must be positive".into()));
    }
    let mut warning = None;
    let depth = if depth > MAX_CF_DEPTH {
        warning = Some(format!("depth {depth} exceeds the double-precision budget of {MAX_CF_DEPTH}"));
        MAX_CF_DEPTH
    } else {
        depth
    };

    let mut coefficients = Vec::new();
    let mut convergents = Vec::new();
    // (p_{k-1}, q_{k-1}) and (p_{k-2}, q_{k-2})
    let (mut p1, mut q1, mut p2, mut q2) = (1u64, 0u64, 0u64, 1u64);
    let mut rest = x;
    while coefficients.len() < depth {
        let a = rest.floor();
        if a >= u64::MAX as f64 {
            warning.get_or_insert_with(|| "coefficient overflow".into());
            break;
        }
        let a = a as u64;
        let (Some(p), Some(q)) = (
            a.checked_mul(p1).and_then(|v| v.checked_add(p2)),
            a.checked_mul(q1).and_then(|v| v.checked_add(q2)),
        ) else {
            warning.get_or_insert_with(|| "convergent overflow".into());
            break;
        };
        coefficients.push(a);
        convergents.push(Convergent { p, q, error: error(p, q) });
        (p2, q2, p1, q1) = (p1, q1, p, q);

        let frac = rest - a as f64;
        if frac <= 0.0 {
            break;
        }
        // p/q already equals x to working precision
        if coefficients.len() < depth && (x - p as f64 / q as f64).abs() <= x * f64::EPSILON {
            warning.get_or_insert_with(|| format!("precision exhausted after {} terms", coefficients.len()));
            break;
        }
        rest = 1.0 / frac;
    }
    Ok(ContinuedFraction {
        x,
        truncated: warning.is_some(),
        coefficients,
        convergents,
        warning,
    })
}

/// Convergents of 2π whose errors are trustworthy: errors use the
/// extended-precision product, and the list stops as soon as an error fails
/// to decrease or to stay below `1/q`.
pub fn two_pi_convergents() -> Vec<Convergent> {
    let cf = continued_fraction_with(TWO_PI_HI, MAX_CF_DEPTH, two_pi_error).expect("2π is positive");
    let mut out: Vec<Convergent> = Vec::new();
    for c in cf.convergents {
        let decreasing = out.last().is_none_or(|prev| c.error < prev.error);
        if !decreasing || c.error * c.q as f64 >= 1.0 || c.error == 0.0 {
            break;
        }
        out.push(c);
    }
    out
}

/// Default capture radius for [`approach_sequence`].
pub const DEFAULT_CAPTURE_RADIUS: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproachTerm {
    pub n: u64,
    pub p: u64,
    pub q: u64,
    /// `|e^{in} − e^{i·target}|`.
    pub chord_error: f64,
    /// `1/q`, an upper bound for the chord error.
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproachSequence {
    pub target: u64,
    pub capture_radius: f64,
    pub terms: Vec<ApproachTerm>,
    /// Set when the trusted convergents ran out before `count` terms.
    pub exhausted: bool,
}

/// Increasing indices `n(k) = target + p_k` whose dial points approach
/// `e^{i·target}`, where `p_k/q_k` are the convergents of 2π whose chord
/// error is below `capture_radius`.
pub fn approach_sequence(target: u64, count: usize, capture_radius: f64) -> Result<ApproachSequence> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be positive".into()));
    }
    if !(capture_radius > 0.0) {
        return Err(Error::InvalidArgument("capture radius must be positive".into()));
    }
    let mut terms = Vec::new();
    for c in two_pi_convergents() {
        if terms.len() == count {
            break;
        }
        let Some(n) = target.checked_add(c.p) else { break };
        let chord_error = index_chord(n, target);
        if chord_error < capture_radius {
            terms.push(ApproachTerm {
                n,
                p: c.p,
                q: c.q,
                chord_error,
                bound: 1.0 / c.q as f64,
            });
        }
    }
    Ok(ApproachSequence {
        target,
        capture_radius,
        exhausted: terms.len() < count,
        terms,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitPoint {
    pub epsilon: f64,
    pub scanned: u64,
    /// Angle in `[0, 2π)`: circular mean of the witnesses.
    pub theta: f64,
    pub witnesses: Vec<u64>,
    /// At least three witnesses were found.
    pub found: bool,
    /// `min_{n ≤ N} |e^{iθ} − e^{in}|`.
    pub distance_to_dial: f64,
    /// `distance_to_dial > ε/2`: `e^{iθ}` is not one of the scanned dial points.
    pub off_dial: bool,
}

impl LimitPoint {
    pub fn center(&self) -> (f64, f64) {
        (self.theta.cos(), self.theta.sin())
    }

    /// Recompute every witness chord against `e^{iθ}`.
    pub fn witnesses_hold(&self) -> bool {
        let c = self.center();
        self.witnesses.iter().all(|&n| {
            let p = dial_point(n).coords;
            (p.0 - c.0).hypot(p.1 - c.1) <= self.epsilon
        })
    }
}

/// Densest cluster of dial points `e^{in}`, `n ≤ N`, inside an ε-ball: a
/// computational witness for an accumulation point of the dial set.
pub fn find_limit_point(epsilon: f64, n_max: u64) -> Result<LimitPoint> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    let mut angles: Vec<(f64, u64)> = (0..=n_max).map(|n| (reduce_angle(n as f64), n)).collect();
    angles.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let len = angles.len();

    // angular width whose chord is ε; a window of that width keeps every
    // member within it of the window's circular mean
    let width = if epsilon >= 2.0 { 2.0 * PI } else { 2.0 * (epsilon / 2.0).asin() };
    let (mut best_start, mut best_count) = (0usize, 0usize);
    let mut end = 0usize;
    for start in 0..len {
        end = end.max(start);
        let unwrapped = |i: usize| angles[i % len].0 + if i >= len { 2.0 * PI } else { 0.0 };
        while end + 1 < start + len && unwrapped(end + 1) - angles[start].0 <= width {
            end += 1;
        }
        let count = end - start + 1;
        if count > best_count {
            (best_start, best_count) = (start, count);
        }
    }
    let members: Vec<u64> = (best_start..best_start + best_count).map(|i| angles[i % len].1).collect();

    let (sx, sy) = members
        .iter()
        .map(|&n| dial_point(n).coords)
        .fold((0.0, 0.0), |acc, c| (acc.0 + c.0, acc.1 + c.1));
    let mut theta = sy.atan2(sx);
    if theta < 0.0 {
        theta += 2.0 * PI;
    }
    let center = (theta.cos(), theta.sin());
    let mut witnesses: Vec<u64> = members
        .into_iter()
        .filter(|&n| {
            let p = dial_point(n).coords;
            (p.0 - center.0).hypot(p.1 - center.1) <= epsilon
        })
        .collect();
    witnesses.sort_unstable();
    let distance_to_dial = (0..=n_max)
        .map(|n| {
            let p = dial_point(n).coords;
            (p.0 - center.0).hypot(p.1 - center.1)
        })
        .fold(f64::INFINITY, f64::min);
    Ok(LimitPoint {
        epsilon,
        scanned: n_max + 1,
        theta,
        found: witnesses.len() >= 3,
        witnesses,
        distance_to_dial,
        off_dial: distance_to_dial > epsilon / 2.0,
    })
}

/// `n,cos n,sin n,error` rows for an approach sequence.
pub fn approach_csv(seq: &ApproachSequence) -> String {
    let mut out = String::from("n,cos_n,sin_n,error\n");
    for t in &seq.terms {
        let p = dial_point(t.n);
        out.push_str(&format!("{},{},{},{}\n", t.n, p.coords.0, p.coords.1, t.chord_error));
    }
    out
}

/// `n,cos n,sin n,error` rows for the first points, `error` being the
/// distance to the nearest rotated point.
pub fn density_csv(n_points: usize) -> String {
    let (space, map) = restricted_rotation(n_points);
    let images: Vec<_> = map.graph().map(|(_, y)| y).collect();
    let mut out = String::from("n,cos_n,sin_n,error\n");
    for p in map.domain() {
        let gap = images.iter().map(|&y| space.distance(p, y)).fold(f64::INFINITY, f64::min);
        let c = dial_point(p.0 as u64).coords;
        out.push_str(&format!("{},{},{},{}\n", p.0, c.0, c.1, gap));
    }
    out
}
