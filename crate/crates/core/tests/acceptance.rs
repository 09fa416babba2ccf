//! Acceptance criteria. Each test writes one `PASS`/`FAIL` line straight to
//! stdout (bypassing the harness capture) and then asserts.

use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use expansion_lab::dial::{self, DialRotation};
use expansion_lab::gallery::{
    chi_distance, chi_scale_map, chi_square_limit, counterexample_space, interleave_square, sup_distance,
    ChiFamilyIndex, SeqPoint,
};
use expansion_lab::harness::{
    no_anticontraction_check, recurrence_search, verify_compact_theorem, verify_counterexample, EnumerationConfig,
    Strategy,
};
use expansion_lab::metric::{diameter, min_epsilon_net, Exact, PointId};
use expansion_lab::sparse::{certify_anticontraction, greedy_sparse, BoundedInterval, IntegerLine};
use expansion_lab::suites::{compact_spaces, SuiteConfig};

fn report(id: u32, title: &str, pass: bool, detail: String) -> bool {
    let line = format!("criterion {id}: {} {title} ({detail})\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
    pass
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

#[test]
fn criterion_1_compact_expansions_are_bijective_isometries() {
    let start = Instant::now();
    let cfg = SuiteConfig::default();
    let (exhaustive, spaces) = compact_spaces(&cfg);
    let ecfg = EnumerationConfig::default();
    let mut counterexamples = 0;
    let mut all_full = true;
    let mut expansive = 0;
    for space in &spaces {
        let r = verify_compact_theorem(space, &ecfg).unwrap();
        all_full &= r.strategy == Strategy::Full;
        expansive += r.expansive_count;
        counterexamples += usize::from(r.counterexample.is_some());
    }
    let elapsed = start.elapsed();
    let pass = report(
        1,
        "every expansive self-map of a finite space is a bijective isometry",
        counterexamples == 0 && all_full && spaces.len() == exhaustive + 1000 && elapsed < Duration::from_secs(30),
        format!(
            "{} exhaustive + {} random spaces, {expansive} expansive maps, {counterexamples} counterexamples, {}",
            exhaustive,
            spaces.len() - exhaustive,
            secs(elapsed)
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_2_witness_values() {
    let q = |p, d| Exact::new(p, d);
    let x = SeqPoint::new(vec![q(1, 1)]);
    let y = SeqPoint::new(vec![q(1, 2)]);
    let zero = SeqPoint::<Exact>::zero();
    let (tx, ty, t0) = (interleave_square(&x), interleave_square(&y), interleave_square(&zero));
    let exact_ok = sup_distance(&x, &y) == q(1, 2)
        && sup_distance(&tx, &ty) == q(3, 4)
        && sup_distance(&x, &zero) == q(1, 1)
        && sup_distance(&tx, &t0) == q(1, 1);

    let xf = SeqPoint::new(vec![1.0f64]);
    let yf = SeqPoint::new(vec![0.5f64]);
    let zf = SeqPoint::<f64>::zero();
    let float_ok = (sup_distance(&interleave_square(&xf), &interleave_square(&yf)) - 0.75).abs() <= 1e-12
        && (sup_distance(&xf, &yf) - 0.5).abs() <= 1e-12
        && (sup_distance(&interleave_square(&xf), &interleave_square(&zf)) - 1.0).abs() <= 1e-12;

    let mut trunc_ok = true;
    for n in 2..=12 {
        let s = counterexample_space(n);
        trunc_ok &= s.exact_distance(PointId(0), PointId(n - 1)) == Some(q(2, 1));
        trunc_ok &= diameter(&s).unwrap() == 2.0;
    }
    let pass = report(
        2,
        "interleave-square and truncation witness values",
        exact_ok && float_ok && trunc_ok,
        format!("exact {exact_ok}, float {float_ok}, d(x1,xn)=2 for n=2..12 {trunc_ok}"),
    );
    assert!(pass);
}

/// Composite Simpson rule for `∫₀¹ |f_n − f_m|²`, applied piece by piece
/// between the jump points of the step functions.
fn chi_quadrature(m: u128, n: u128) -> f64 {
    let f = |k: u128, t: f64| if t <= 1.0 / k as f64 { (k as f64).sqrt() } else { 0.0 };
    let g = |t: f64| (f(n, t) - f(m, t)).powi(2);
    let mut cuts = vec![0.0, 1.0 / m as f64, 1.0 / n as f64, 1.0];
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let steps = 64;
        let h = (b - a) / steps as f64;
        // open evaluation points keep the jump values out
        let mut s = 0.0;
        for i in 0..steps {
            let lo = a + i as f64 * h;
            let (l, mid, r) = (lo + h * 1e-9, lo + h / 2.0, lo + h * (1.0 - 1e-9));
            s += h / 6.0 * (g(l) + 4.0 * g(mid) + g(r));
        }
        total += s;
    }
    total.sqrt()
}

#[test]
fn criterion_3_chi_family() {
    let idx = |n| ChiFamilyIndex::new(n).unwrap();
    let mut worst: f64 = 0.0;
    for m in 1..=50u128 {
        for n in m + 1..=50 {
            worst = worst.max((chi_distance(idx(m), idx(n)) - chi_quadrature(m, n)).abs());
        }
    }
    let mut scale_exact = true;
    for k in [2u128, 3, 7, 1000] {
        for m in 1..=30u128 {
            for n in m + 1..=30 {
                scale_exact &= chi_distance(chi_scale_map(k, idx(m)), chi_scale_map(k, idx(n))) == chi_distance(idx(m), idx(n));
            }
        }
    }
    let limit = chi_square_limit(1_000_000);
    let square_ok = limit.strictly_decreasing && limit.all_above_one && limit.last.0 == 1e6 && limit.last.1 - 1.0 < 1e-3;
    let pass = report(
        3,
        "chi-family distance formula, scale isometry, square-map limit",
        worst <= 1e-9 && scale_exact && square_ok,
        format!(
            "max |formula - quadrature| = {worst:.2e}, scale exact {scale_exact}, ratio at n=1e6 = 1 + {:.3e}, decreasing {}",
            limit.last.1 - 1.0,
            limit.strictly_decreasing
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_4_truncated_counterexample() {
    let start = Instant::now();
    let cfg = EnumerationConfig::default();
    let mut pass = true;
    let mut details = Vec::new();
    for (n, strategy) in [(5usize, Strategy::Full), (12, Strategy::Pruned)] {
        let r = verify_counterexample(n, &cfg).unwrap();
        let net = min_epsilon_net(&counterexample_space(n), 0.5).unwrap();
        pass &= r.strategy == strategy
            && r.only_identity
            && r.all_distances_exceed_one
            && net.size() == n
            && r.half_net_size == n;
        details.push(format!(
            "N={n} {:?}: expansive maps {:?}, distances > 1 {}, 0.5-net {}, extendable-only-identity {}",
            r.strategy, r.expansive_maps, r.all_distances_exceed_one, net.size(), r.extendable_only_identity
        ));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(60);
    details.push(secs(elapsed));
    let pass = report(4, "identity is the only expansive self-map of the truncated set", pass, details.join("; "));
    assert!(pass, "the swap of the last two points is an isometry of every truncation; see README");
}

#[test]
fn criterion_5_dial_set() {
    let defect = dial::isometry_defect(10_000);
    let (margin, at) = dial::nonsurjectivity_margin(100);
    let density = dial::range_density_check(1000, 0.05).unwrap();
    let start = dial::dial_point(0);
    let r1 = recurrence_search(&DialRotation, &start, 0.02, 1000).unwrap().n();
    let r2 = recurrence_search(&DialRotation, &start, 1e-4, 10_000).unwrap().n();

    // brute-force oracle: first n whose chord to e^{i0} is within epsilon
    let scan = |eps: f64| (1..=10_000u64).find(|&n| 2.0 * ((n as f64 / 2.0).sin()).abs() <= eps);
    let a = dial::approach_sequence(0, 3, dial::DEFAULT_CAPTURE_RADIUS).unwrap();
    let ns: Vec<u64> = a.terms.iter().map(|t| t.n).collect();
    let decreasing = a.terms.windows(2).all(|w| w[1].chord_error < w[0].chord_error);
    let pass = report(
        5,
        "dial rotation: isometry, non-surjective, dense range, recurrence, approach",
        defect <= 1e-12
            && margin > 1.7e-2
            && density.dense
            && r1 == Some(44)
            && r2 == Some(710)
            && scan(0.02) == Some(44)
            && scan(1e-4) == Some(710)
            && ns == [44, 333, 710]
            && decreasing,
        format!(
            "defect {defect:.2e}, margin {margin:.6} at n={at}, density worst {:.2e}, recurrence {r1:?}/{r2:?}, approach {ns:?}",
            density.worst_distance
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_6_boundedness() {
    let line = greedy_sparse(&IntegerLine, 4, 1000, 2.0).unwrap();
    let cert = certify_anticontraction(&line).unwrap();
    let bounded = greedy_sparse(&BoundedInterval, 3, 100_000, 2.0).unwrap();

    let (_, spaces) = compact_spaces(&SuiteConfig::default());
    let cfg = EnumerationConfig::default();
    let mut holds = true;
    let mut maps = 0;
    for s in &spaces {
        let r = no_anticontraction_check(s, &cfg).unwrap();
        holds &= r.holds;
        maps += r.expansive_maps_checked;
    }
    let pass = report(
        6,
        "sparse sets in unbounded spaces, none in bounded ones",
        line.points == [0, 1, 4, 13] && cert.e_achieved == 3.0 && bounded.failed && holds,
        format!(
            "points {:?}, E = {}, bounded oracle failed after {} scans, {} spaces / {maps} expansive maps without anticontraction",
            line.points,
            cert.e_achieved,
            bounded.scanned,
            spaces.len()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_7_deterministic_reports() {
    let bin = env!("CARGO_BIN_EXE_expansion-lab");
    let run = |suite: &str| {
        Command::new(bin)
            .args(["--seed", "42", "verify", suite, "--random", "200"])
            .output()
            .expect("binary runs")
    };
    let mut same = true;
    let mut sizes = Vec::new();
    for suite in ["compact", "dial", "sparse", "boundedness"] {
        let (a, b) = (run(suite), run(suite));
        same &= a.stdout == b.stdout && !a.stdout.is_empty();
        sizes.push(format!("{suite} {}B", a.stdout.len()));
    }
    let pass = report(7, "verify reports are byte-identical for the same seed", same, sizes.join(", "));
    assert!(pass);
}
