//! Exhaustive checks on small finite spaces.
//!
//! A finite space is compact, so every expansive self-map of it must be a
//! bijective isometry, and no subset of it supports an anticontraction. The
//! functions here enumerate self-maps and check those facts directly.
//!
//! Any expansive map is injective (`Tx = Ty` would give `0 < d(x, y)`), so
//! the pruned search (injective partial maps, extended one point at a time and
//! cut as soon as a pair shrinks) finds exactly the same maps as the full
//! `nⁿ` scan; it is used once `nⁿ` exceeds the budget.

use std::cmp::Ordering;

use num_integer::Integer;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expansion::{classify, ExpansionClass};
use crate::metric::{
    cmp_rel, diameter, min_epsilon_net, validate_metric, Dynamics, Exact, FiniteMetricSpace, FiniteSystem,
    PointId, SelfMap, DEFAULT_TOL,
};

/// `7⁷`: the largest full scan run by default.
pub const DEFAULT_BUDGET: u128 = 823_543;
/// Largest space handled by the pruned search.
pub const DEFAULT_PRUNED_LIMIT: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnumerationConfig {
    /// Largest `nⁿ` scanned in full.
    pub budget: u128,
    pub pruned_limit: usize,
    pub tol: f64,
    pub workers: usize,
}

impl Default for EnumerationConfig {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            pruned_limit: DEFAULT_PRUNED_LIMIT,
            tol: DEFAULT_TOL,
            workers: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Full,
    Pruned,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TaggedMap {
    pub map: SelfMap,
    pub class: ExpansionClass,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Enumeration {
    pub size: usize,
    /// `nⁿ`, the number of self-maps covered.
    pub total_maps: u128,
    pub strategy: Strategy,
    /// Maps (full scan) or search nodes (pruned) actually visited.
    pub visited: u128,
    pub expansive: Vec<TaggedMap>,
}

fn map_count(n: usize) -> u128 {
    (n as u128).checked_pow(n as u32).unwrap_or(u128::MAX)
}

fn choose_strategy(n: usize, cfg: &EnumerationConfig) -> Result<Strategy> {
    let required = map_count(n);
    if required <= cfg.budget {
        Ok(Strategy::Full)
    } else if n <= cfg.pruned_limit {
        Ok(Strategy::Pruned)
    } else {
        Err(Error::BudgetExceeded {
            required,
            budget: cfg.budget,
        })
    }
}

/// Whether `images[i]` keeps `i` at least as far from every earlier point.
#[inline]
fn extends(space: &FiniteMetricSpace, images: &[usize], i: usize, tol: f64) -> bool {
    (0..i).all(|j| space.cmp_pairs((images[i], images[j]), (i, j), tol) != Ordering::Less)
}

fn full_scan_from(space: &FiniteMetricSpace, first: usize, tol: f64) -> (u128, Vec<Vec<usize>>) {
    let n = space.len();
    let mut images = vec![0usize; n];
    images[0] = first;
    let mut found = Vec::new();
    let mut visited = 0u128;
    loop {
        visited += 1;
        if (1..n).all(|i| extends(space, &images, i, tol)) {
            found.push(images.clone());
        }
        // odometer over positions 1..n, last position fastest
        let mut pos = n;
        loop {
            if pos == 1 {
                return (visited, found);
            }
            pos -= 1;
            images[pos] += 1;
            if images[pos] < n {
                break;
            }
            images[pos] = 0;
        }
    }
}

fn pruned_from(space: &FiniteMetricSpace, first: usize, tol: f64) -> (u128, Vec<Vec<usize>>) {
    fn go(
        space: &FiniteMetricSpace,
        tol: f64,
        images: &mut Vec<usize>,
        used: &mut [bool],
        visited: &mut u128,
        found: &mut Vec<Vec<usize>>,
    ) {
        *visited += 1;
        let i = images.len();
        if i == space.len() {
            found.push(images.clone());
            return;
        }
        for y in 0..space.len() {
            if used[y] {
                continue;
            }
            images.push(y);
            if extends(space, images, i, tol) {
                used[y] = true;
                go(space, tol, images, used, visited, found);
                used[y] = false;
            }
            images.pop();
        }
    }
    let mut used = vec![false; space.len()];
    used[first] = true;
    let mut images = vec![first];
    let mut visited = 0;
    let mut found = Vec::new();
    go(space, tol, &mut images, &mut used, &mut visited, &mut found);
    (visited, found)
}

fn tag(space: &FiniteMetricSpace, images: Vec<usize>, tol: f64) -> Result<TaggedMap> {
    let map = SelfMap::new(images);
    let class = if space.len() < 2 {
        ExpansionClass::Isometry
    } else {
        classify(space, &map, tol)?
    };
    Ok(TaggedMap { map, class })
}

/// Every expansive self-map of `space`, each tagged with its class, in
/// lexicographic order of image tables.
pub fn enumerate_expansive_maps(space: &FiniteMetricSpace, cfg: &EnumerationConfig) -> Result<Enumeration> {
    let n = space.len();
    if n == 0 {
        return Err(Error::EmptySpace);
    }
    let strategy = choose_strategy(n, cfg)?;
    let scan = |first: usize| match strategy {
        Strategy::Full => full_scan_from(space, first, cfg.tol),
        Strategy::Pruned => pruned_from(space, first, cfg.tol),
    };

    // partition by the image of point 0; merge in that order
    let workers = cfg.workers.clamp(1, n);
    let parts: Vec<(u128, Vec<Vec<usize>>)> = if workers == 1 {
        (0..n).map(scan).collect()
    } else {
        let mut slots: Vec<Option<(u128, Vec<Vec<usize>>)>> = vec![None; n];
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let scan = &scan;
                    s.spawn(move || (w..n).step_by(workers).map(|f| (f, scan(f))).collect::<Vec<_>>())
                })
                .collect();
            for h in handles {
                for (f, part) in h.join().expect("enumeration worker panicked") {
                    slots[f] = Some(part);
                }
            }
        });
        slots.into_iter().map(Option::unwrap).collect()
    };

    let mut visited = 0;
    let mut expansive = Vec::new();
    for (v, found) in parts {
        visited += v;
        for images in found {
            expansive.push(tag(space, images, cfg.tol)?);
        }
    }
    Ok(Enumeration {
        size: n,
        total_maps: map_count(n),
        strategy,
        visited,
        expansive,
    })
}

/// Length of the cycle structure's lcm, for a permutation table.
pub fn permutation_order(images: &[usize]) -> u64 {
    let mut seen = vec![false; images.len()];
    let mut order = 1u64;
    for start in 0..images.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0u64;
        let mut p = start;
        while !seen[p] {
            seen[p] = true;
            p = images[p];
            len += 1;
        }
        order = order.lcm(&len);
    }
    order
}

fn sum_preserved(space: &FiniteMetricSpace, map: &SelfMap, tol: f64) -> bool {
    let graph: Vec<_> = map.graph().collect();
    let mut before = 0.0;
    let mut after = 0.0;
    let mut before_q = Exact::from_integer(0);
    let mut after_q = Exact::from_integer(0);
    for (i, &(x, tx)) in graph.iter().enumerate() {
        for &(y, ty) in &graph[i + 1..] {
            before += space.distance(x, y);
            after += space.distance(tx, ty);
            if let (Some(a), Some(b)) = (space.exact_distance(x, y), space.exact_distance(tx, ty)) {
                before_q += a;
                after_q += b;
            }
        }
    }
    if space.is_exact() {
        before_q == after_q
    } else {
        cmp_rel(after, before, tol * graph.len().max(1) as f64) == Ordering::Equal
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnumerationReport {
    pub size: usize,
    pub total_maps: u128,
    pub strategy: Strategy,
    pub expansive_count: usize,
    pub all_expansive_are_isometric_bijections: bool,
    /// First expansive map that is not a bijective isometry.
    pub counterexample: Option<TaggedMap>,
    /// Every expansive map keeps the sum of pairwise distances.
    pub distance_sum_preserved: bool,
    /// Every point returns exactly (ε = 0) within the map's permutation order.
    pub exact_recurrence: bool,
    /// No expansive map on the whole space is an anticontraction.
    pub no_anticontraction: bool,
}

/// Check that every expansive self-map of `space` is a bijective isometry.
pub fn verify_compact_theorem(space: &FiniteMetricSpace, cfg: &EnumerationConfig) -> Result<EnumerationReport> {
    let e = enumerate_expansive_maps(space, cfg)?;
    let mut counterexample = None;
    let mut sums = true;
    let mut recurrence = true;
    for t in &e.expansive {
        let bijective = t.map.is_total() && t.map.is_injective();
        if (!bijective || !t.class.is_isometry()) && counterexample.is_none() {
            counterexample = Some(t.clone());
        }
        sums &= sum_preserved(space, &t.map, cfg.tol);
        if bijective {
            let order = permutation_order(&t.map.images().unwrap());
            let sys = FiniteSystem { space, map: &t.map };
            recurrence &= space.points().all(|x| {
                matches!(recurrence_search(&sys, &x, 0.0, order), Ok(Recurrence::Found { n, .. }) if n <= order)
            });
        } else {
            recurrence = false;
        }
    }
    Ok(EnumerationReport {
        size: e.size,
        total_maps: e.total_maps,
        strategy: e.strategy,
        expansive_count: e.expansive.len(),
        all_expansive_are_isometric_bijections: counterexample.is_none(),
        counterexample,
        distance_sum_preserved: sums,
        exact_recurrence: recurrence,
        no_anticontraction: e.expansive.iter().all(|t| t.class.expansion_constant().is_none()),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Recurrence {
    /// Smallest `n ≥ 1` with `d(x, Tⁿx) ≤ ε`.
    Found { n: u64, distance: f64 },
    /// No return within `max_iter`; the closest approach seen.
    NotFound { best_n: u64, best_distance: f64, max_iter: u64 },
}

impl Recurrence {
    pub fn n(&self) -> Option<u64> {
        match self {
            Self::Found { n, .. } => Some(*n),
            Self::NotFound { .. } => None,
        }
    }
}

/// First return of the orbit of `x` to within `epsilon` of `x`.
pub fn recurrence_search<D: Dynamics>(sys: &D, x: &D::Point, epsilon: f64, max_iter: u64) -> Result<Recurrence> {
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be non-negative, got {epsilon}")));
    }
    if max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be positive".into()));
    }
    let mut p = x.clone();
    let mut best = (0u64, f64::INFINITY);
    for n in 1..=max_iter {
        p = sys.step(&p).ok_or(Error::InvalidArgument(format!("orbit left the domain at step {}", n - 1)))?;
        let d = sys.distance(x, &p);
        if d <= epsilon {
            return Ok(Recurrence::Found { n, distance: d });
        }
        if d < best.1 {
            best = (n, d);
        }
    }
    Ok(Recurrence::NotFound {
        best_n: best.0,
        best_distance: best.1,
        max_iter,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoAnticontractionReport {
    pub holds: bool,
    pub subsets_checked: usize,
    pub expansive_maps_checked: usize,
    /// Subset (as point ids of the original space) and map, if one was found.
    pub witness: Option<(Vec<PointId>, TaggedMap)>,
}

/// Largest space for which every subset is checked.
pub const SUBSET_LIMIT: usize = 5;

/// Check that no self-map of the space, or of any of its subsets (for spaces
/// of at most [`SUBSET_LIMIT`] points), is an anticontraction.
pub fn no_anticontraction_check(space: &FiniteMetricSpace, cfg: &EnumerationConfig) -> Result<NoAnticontractionReport> {
    let n = space.len();
    let subsets: Vec<Vec<PointId>> = if n <= SUBSET_LIMIT {
        (1u32..(1 << n))
            .filter(|m| m.count_ones() >= 2)
            .map(|m| (0..n).filter(|i| m & (1 << i) != 0).map(PointId).collect())
            .collect()
    } else {
        vec![space.points().collect()]
    };
    let mut report = NoAnticontractionReport {
        holds: true,
        subsets_checked: 0,
        expansive_maps_checked: 0,
        witness: None,
    };
    for subset in subsets {
        let sub = space.restrict(&subset);
        let e = enumerate_expansive_maps(&sub, cfg)?;
        report.subsets_checked += 1;
        report.expansive_maps_checked += e.expansive.len();
        if let Some(t) = e.expansive.into_iter().find(|t| t.class.expansion_constant().is_some()) {
            report.holds = false;
            report.witness = Some((subset, t));
            break;
        }
    }
    Ok(report)
}

/// The expansion constant of `map` if it is an anticontraction. Sampled
/// restrictions are refused: only total self-maps count.
pub fn supports_anticontraction(space: &FiniteMetricSpace, map: &SelfMap, tol: f64) -> Result<Option<f64>> {
    map.check_against(space)?;
    map.require_total()?;
    Ok(classify(space, map, tol)?.expansion_constant())
}

/// Every valid metric on `1..=max_size` points with distances drawn from
/// `values`, in exact mode.
pub fn all_spaces_over(max_size: usize, values: &[i64]) -> Vec<FiniteMetricSpace> {
    let mut out = Vec::new();
    for n in 1..=max_size {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let combos = values.len().pow(pairs.len() as u32);
        for code in 0..combos {
            let mut c = code;
            let mut m = vec![vec![0i64; n]; n];
            for &(i, j) in &pairs {
                let v = values[c % values.len()];
                c /= values.len();
                m[i][j] = v;
                m[j][i] = v;
            }
            let space = FiniteMetricSpace::from_fn_exact(n, |i, j| Exact::from_integer(m[i][j]));
            if validate_metric(&space, 0.0).valid {
                out.push(space);
            }
        }
    }
    out
}

/// Random exact metric on `n` points: distances uniform in `1..=max_dist`,
/// then replaced by shortest-path distances so the triangle inequality holds.
pub fn random_space<R: Rng>(rng: &mut R, n: usize, max_dist: i64) -> FiniteMetricSpace {
    let mut m = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = rng.gen_range(1..=max_dist);
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if m[i][k] + m[k][j] < m[i][j] {
                    m[i][j] = m[i][k] + m[k][j];
                }
            }
        }
    }
    FiniteMetricSpace::from_fn_exact(n, |i, j| Exact::from_integer(m[i][j]))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub n: usize,
    /// `d(x_m, x_n) = 1 + 1/min(m, n)` for every pair, exactly.
    pub distances_match_formula: bool,
    pub all_distances_exceed_one: bool,
    pub diameter: f64,
    pub half_net_size: usize,
    pub strategy: Strategy,
    /// Image tables of every expansive self-map of `{x₁ … x_n}`.
    pub expansive_maps: Vec<Vec<usize>>,
    pub only_identity: bool,
    /// Expansive maps of `{x₁ … x_n}` that are restrictions of expansive maps
    /// of `{x₁ … x_{n+1}}`; the truncation's last point has no successor, so
    /// this is the finite shadow of the infinite set's property.
    pub extendable_maps: Vec<Vec<usize>>,
    pub extendable_only_identity: bool,
}

/// Check the identity-only property on the first `n` points of the sequence
/// `x_k = (1 + 1/k)·e_k` under the sup metric.
pub fn verify_counterexample(n: usize, cfg: &EnumerationConfig) -> Result<CounterexampleReport> {
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    let space = crate::gallery::counterexample_space(n);
    let mut formula = true;
    let mut above_one = true;
    for a in 0..n {
        for b in a + 1..n {
            let d = space.exact_distance(PointId(a), PointId(b)).unwrap();
            let k = (a.min(b) + 1) as i64;
            formula &= d == Exact::new(k + 1, k);
            above_one &= d > Exact::from_integer(1);
        }
    }
    let e = enumerate_expansive_maps(&space, cfg)?;
    let identity: Vec<usize> = (0..n).collect();
    let expansive_maps: Vec<Vec<usize>> = e.expansive.iter().map(|t| t.map.images().unwrap()).collect();

    // the one-point extension is searched under the same refusal rules, one size up
    let bigger = crate::gallery::counterexample_space(n + 1);
    let ext_cfg = EnumerationConfig {
        pruned_limit: cfg.pruned_limit.max(n + 1),
        ..cfg.clone()
    };
    let mut extendable_maps: Vec<Vec<usize>> = enumerate_expansive_maps(&bigger, &ext_cfg)?
        .expansive
        .iter()
        .map(|t| t.map.images().unwrap())
        .filter(|img| img[..n].iter().all(|&y| y < n))
        .map(|img| img[..n].to_vec())
        .collect();
    extendable_maps.dedup();

    Ok(CounterexampleReport {
        n,
        distances_match_formula: formula,
        all_distances_exceed_one: above_one,
        diameter: diameter(&space)?,
        half_net_size: min_epsilon_net(&space, 0.5)?.size(),
        strategy: e.strategy,
        only_identity: expansive_maps == [identity.clone()],
        expansive_maps,
        extendable_only_identity: extendable_maps == [identity],
        extendable_maps,
    })
}
