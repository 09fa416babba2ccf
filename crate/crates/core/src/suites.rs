//! Verification suites behind `expansion-lab verify`.
//!
//! Every suite returns a [`SuiteReport`] listing named checks. Reports carry
//! no timings or other run-dependent data, so equal configurations give
//! byte-identical JSON.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::dial;
use crate::error::{Error, Result};
use crate::harness::{
    all_spaces_over, no_anticontraction_check, random_space, recurrence_search, verify_compact_theorem,
    verify_counterexample, EnumerationConfig,
};
use crate::metric::{diameter, min_epsilon_net, PointId};
use crate::sparse::{
    self, certify_anticontraction, greedy_sparse, iterate_growth, BoundedInterval, DialOracle, Geometric, IntegerLine,
    MetricOracle, SupLattice, DEFAULT_MULTIPLIER,
};

pub const SUITES: [&str; 5] = ["compact", "counterexample", "dial", "sparse", "boundedness"];

/// Distance values the exhaustive space generator draws from.
pub const SPACE_VALUES: [i64; 3] = [1, 2, 3];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub tol: f64,
    pub budget: u128,
    pub workers: usize,
    /// Largest space size for `compact` and `boundedness`.
    pub max_size: usize,
    /// Seeded random spaces added to the exhaustive ones.
    pub random_instances: usize,
    /// Truncation size for `counterexample`.
    pub n: usize,
    pub epsilon: f64,
    /// Dial points scanned.
    pub points: usize,
    /// Sparse-set size.
    pub count: usize,
    pub scan_budget: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            tol: crate::metric::DEFAULT_TOL,
            budget: crate::harness::DEFAULT_BUDGET,
            workers: 1,
            max_size: 4,
            random_instances: 1000,
            n: 5,
            epsilon: 0.05,
            points: 1000,
            count: 4,
            scan_budget: 100_000,
        }
    }
}

impl SuiteConfig {
    pub fn enumeration(&self) -> EnumerationConfig {
        EnumerationConfig {
            budget: self.budget,
            tol: self.tol,
            workers: self.workers,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: Value,
}

impl Check {
    fn new(name: &str, pass: bool, detail: Value) -> Self {
        Self {
            name: name.into(),
            pass,
            detail,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Artifact {
    pub name: &'static str,
    pub version: &'static str,
}

pub const ARTIFACT: Artifact = Artifact {
    name: env!("CARGO_PKG_NAME"),
    version: env!("CARGO_PKG_VERSION"),
};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub artifact: Artifact,
    pub config: SuiteConfig,
    pub suite: String,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl SuiteReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub fn run_suite(suite: &str, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let checks = match suite {
        "compact" => compact(cfg)?,
        "counterexample" => counterexample(cfg)?,
        "dial" => dial_suite(cfg)?,
        "sparse" => sparse_suite(cfg)?,
        "boundedness" => boundedness(cfg)?,
        other => return Err(Error::InvalidArgument(format!("unknown suite {other:?}"))),
    };
    Ok(SuiteReport {
        artifact: ARTIFACT,
        config: cfg.clone(),
        suite: suite.into(),
        pass: checks.iter().all(|c| c.pass),
        checks,
    })
}

/// Exhaustive spaces over [`SPACE_VALUES`] plus seeded random ones.
pub fn compact_spaces(cfg: &SuiteConfig) -> (usize, Vec<crate::metric::FiniteMetricSpace>) {
    let mut spaces = all_spaces_over(cfg.max_size, &SPACE_VALUES);
    let exhaustive = spaces.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.random_instances {
        let n = rng.gen_range(2..=cfg.max_size.max(2));
        spaces.push(random_space(&mut rng, n, 10));
    }
    (exhaustive, spaces)
}

fn compact(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let (exhaustive, spaces) = compact_spaces(cfg);
    let ecfg = cfg.enumeration();
    let (mut maps, mut expansive, mut counterexamples) = (0u128, 0usize, 0usize);
    let (mut sums, mut recur, mut anti) = (true, true, true);
    let mut first = None;
    for (i, space) in spaces.iter().enumerate() {
        let r = verify_compact_theorem(space, &ecfg)?;
        maps += r.total_maps;
        expansive += r.expansive_count;
        if let Some(c) = &r.counterexample {
            counterexamples += 1;
            first.get_or_insert(json!({ "space": i, "map": c.map, "class": c.class.name() }));
        }
        sums &= r.distance_sum_preserved;
        recur &= r.exact_recurrence;
        anti &= r.no_anticontraction;
    }
    let scope = json!({
        "spaces": spaces.len(),
        "exhaustive_spaces": exhaustive,
        "random_spaces": spaces.len() - exhaustive,
        "maps_scanned": maps.to_string(),
        "expansive_maps": expansive,
    });
    Ok(vec![
        Check::new(
            "expansive_maps_are_bijective_isometries",
            counterexamples == 0,
            json!({ "scope": scope, "counterexamples": counterexamples, "first": first }),
        ),
        Check::new("distance_sum_preserved", sums, json!({})),
        Check::new("exact_recurrence_within_order", recur, json!({})),
        Check::new("no_anticontraction", anti, json!({})),
    ])
}

fn counterexample(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let r = verify_counterexample(cfg.n, &cfg.enumeration())?;
    let space = crate::gallery::counterexample_space(cfg.n);
    let d1n = space.distance(PointId(0), PointId(cfg.n - 1));
    Ok(vec![
        Check::new("distances_match_formula", r.distances_match_formula, json!({})),
        Check::new("all_distances_exceed_one", r.all_distances_exceed_one, json!({})),
        Check::new("diameter_is_two", r.diameter == 2.0 && d1n == 2.0, json!({ "diameter": r.diameter, "d_1n": d1n })),
        Check::new(
            "half_net_size_is_n",
            r.half_net_size == cfg.n,
            json!({ "size": r.half_net_size }),
        ),
        Check::new(
            "only_identity",
            r.only_identity,
            json!({ "strategy": r.strategy, "expansive_maps": r.expansive_maps }),
        ),
        Check::new(
            "extendable_only_identity",
            r.extendable_only_identity,
            json!({ "extendable_maps": r.extendable_maps }),
        ),
    ])
}

fn dial_suite(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let defect = dial::isometry_defect(cfg.points);
    let (margin, at) = dial::nonsurjectivity_margin(100);
    let (space, map) = dial::restricted_rotation(cfg.points);
    let surj = crate::expansion::is_surjective(&space, &map)?;
    let density = dial::range_density_check(cfg.points, cfg.epsilon)?;
    let start = dial::dial_point(0);
    let r44 = recurrence_search(&dial::DialRotation, &start, 0.02, 1000)?;
    let r710 = recurrence_search(&dial::DialRotation, &start, 1e-4, 10_000)?;
    let approach = dial::approach_sequence(0, 3, dial::DEFAULT_CAPTURE_RADIUS)?;
    let ns: Vec<u64> = approach.terms.iter().map(|t| t.n).collect();
    let decreasing = approach.terms.windows(2).all(|w| w[1].chord_error < w[0].chord_error);
    let limit = dial::find_limit_point(cfg.epsilon, cfg.points as u64)?;
    Ok(vec![
        Check::new("rotation_isometry", defect <= 1e-12, json!({ "points": cfg.points, "max_defect": defect })),
        Check::new(
            "start_not_in_image",
            surj.missing == vec![PointId(0)] && margin > 1.7e-2,
            json!({ "missing": surj.missing, "margin_n_le_100": margin, "closest_n": at }),
        ),
        Check::new("range_dense", density.dense, serde_json::to_value(&density).expect("serializable")),
        Check::new("recurrence_0_02", r44.n() == Some(44), serde_json::to_value(&r44).expect("serializable")),
        Check::new("recurrence_1e-4", r710.n() == Some(710), serde_json::to_value(&r710).expect("serializable")),
        Check::new(
            "approach_sequence",
            ns == [44, 333, 710] && decreasing,
            serde_json::to_value(&approach).expect("serializable"),
        ),
        Check::new(
            "limit_point",
            limit.found && limit.witnesses_hold(),
            json!({ "theta": limit.theta, "witnesses": limit.witnesses.len(), "distance_to_dial": limit.distance_to_dial }),
        ),
    ])
}

fn unbounded_check<O: MetricOracle>(oracle: &O, cfg: &SuiteConfig) -> Result<Check> {
    let count = cfg.count.max(3);
    let set = greedy_sparse(oracle, count, cfg.scan_budget, DEFAULT_MULTIPLIER)?;
    let cert = if set.failed { None } else { certify_anticontraction(&set).ok() };
    let growth = iterate_growth(&set);
    let geometric = growth.iter().enumerate().all(|(k, g)| *g >= 2f64.powi(k as i32));
    let pass = !set.failed && set.certificates_hold() && cert.as_ref().is_some_and(|c| c.e_achieved > 2.0) && geometric;
    Ok(Check::new(
        &format!("unbounded_{}", set.oracle),
        pass,
        json!({ "points": set.points, "scanned": set.scanned, "certificate": cert, "iterate_growth": growth }),
    ))
}

fn bounded_check<O: MetricOracle>(oracle: &O, cfg: &SuiteConfig) -> Result<Check> {
    let set = greedy_sparse(oracle, cfg.count.max(4), cfg.scan_budget, DEFAULT_MULTIPLIER)?;
    Ok(Check::new(
        &format!("bounded_{}", set.oracle),
        set.failed,
        json!({ "accepted": set.len(), "scanned": set.scanned, "failed": set.failed }),
    ))
}

fn sparse_suite(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let line = greedy_sparse(&IntegerLine, 4, cfg.scan_budget, DEFAULT_MULTIPLIER)?;
    let cert = certify_anticontraction(&line)?;
    let mut checks = vec![Check::new(
        "integer_line_0_1_4_13",
        line.points == [0, 1, 4, 13] && cert.e_achieved == 3.0 && cert.worst_pair == (1, 2),
        json!({ "points": line.points, "certificate": cert }),
    )];
    checks.push(unbounded_check(&IntegerLine, cfg)?);
    checks.push(unbounded_check(&SupLattice::default(), cfg)?);
    checks.push(unbounded_check(&Geometric::default(), cfg)?);
    checks.push(bounded_check(&BoundedInterval, cfg)?);
    checks.push(bounded_check(&DialOracle, cfg)?);
    let axioms = [
        sparse::check_oracle_axioms(&IntegerLine, 20, cfg.tol),
        sparse::check_oracle_axioms(&SupLattice::default(), 20, cfg.tol),
        sparse::check_oracle_axioms(&BoundedInterval, 20, cfg.tol),
    ];
    checks.push(Check::new(
        "oracle_axioms",
        axioms.iter().all(|a| a.holds()),
        serde_json::to_value(&axioms).expect("serializable"),
    ));
    Ok(checks)
}

fn boundedness(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let ecfg = cfg.enumeration();
    let spaces = all_spaces_over(cfg.max_size, &SPACE_VALUES);
    let (mut subsets, mut maps) = (0usize, 0usize);
    let mut witness = None;
    for (i, space) in spaces.iter().enumerate() {
        let r = no_anticontraction_check(space, &ecfg)?;
        subsets += r.subsets_checked;
        maps += r.expansive_maps_checked;
        if !r.holds && witness.is_none() {
            witness = Some(json!({ "space": i, "witness": r.witness }));
        }
    }
    let bounded_diameters: Vec<f64> = spaces.iter().map(diameter).collect::<Result<_>>()?;
    let mut checks = vec![Check::new(
        "finite_spaces_admit_no_anticontraction",
        witness.is_none(),
        json!({
            "spaces": spaces.len(),
            "subsets": subsets,
            "expansive_maps": maps,
            "max_diameter": bounded_diameters.iter().copied().fold(0.0, f64::max),
            "witness": witness,
        }),
    )];
    checks.push(unbounded_check(&IntegerLine, cfg)?);
    checks.push(unbounded_check(&Geometric::default(), cfg)?);
    checks.push(bounded_check(&BoundedInterval, cfg)?);
    // a bounded space is totally bounded here: a finite 0.25-net of the dial sample
    let net = min_epsilon_net(&dial::dial_space(100), 0.25)?;
    checks.push(Check::new(
        "dial_sample_net",
        net.size() <= 26,
        json!({ "size": net.size(), "optimal": net.optimal }),
    ));
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SuiteConfig {
        SuiteConfig {
            max_size: 3,
            random_instances: 20,
            points: 200,
            ..Default::default()
        }
    }

    #[test]
    fn suites_pass_on_small_config() {
        for s in ["compact", "dial", "sparse", "boundedness"] {
            let r = run_suite(s, &small()).unwrap();
            assert!(r.pass, "{s}: {:#?}", r.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>());
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let a = serde_json::to_string(&run_suite("compact", &small()).unwrap()).unwrap();
        let b = serde_json::to_string(&run_suite("compact", &small()).unwrap()).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("{\"artifact\":{\"name\":\"expansion-lab\""));
    }

    #[test]
    fn unknown_suite() {
        assert!(run_suite("nope", &small()).is_err());
    }
}
