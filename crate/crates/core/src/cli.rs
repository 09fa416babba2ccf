//! Command-line front end. `main` forwards to [`run`], which writes to the
//! given streams and returns the process exit code.
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage or parse error, 3 invalid
//! input data (metric axioms, map shape).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::dial;
use crate::error::Error;
use crate::expansion::classify_detailed;
use crate::harness::{enumerate_expansive_maps, recurrence_search, EnumerationConfig, Recurrence};
use crate::metric::{validate_metric, FiniteMetricSpace, FiniteSystem, PointId, SelfMap, SpaceDocument};
use crate::sparse::{self, MetricOracle};
use crate::suites::{self, SuiteConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INVALID_INPUT: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// Settings shared by every command.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub tol: f64,
    pub budget: u128,
    pub format: Format,
    pub workers: usize,
}

impl RunConfig {
    pub fn validated(self) -> Result<Self, String> {
        if !(self.tol >= 0.0) || !self.tol.is_finite() {
            return Err(format!("--tol must be a finite number >= 0, got {}", self.tol));
        }
        if self.budget < 1 {
            return Err("--budget must be at least 1".into());
        }
        if self.workers < 1 {
            return Err("--workers must be at least 1".into());
        }
        Ok(self)
    }

    pub fn enumeration(&self) -> EnumerationConfig {
        EnumerationConfig {
            budget: self.budget,
            tol: self.tol,
            workers: self.workers,
            ..Default::default()
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "expansion-lab", version, about = "Expansive self-maps of metric spaces")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Relative tolerance for distance comparisons.
    #[arg(long, global = true, default_value_t = crate::metric::DEFAULT_TOL)]
    tol: f64,
    /// Largest number of maps a full scan may visit.
    #[arg(long, global = true, default_value_t = crate::harness::DEFAULT_BUDGET)]
    budget: u128,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Threads for enumeration scans.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify a map on a finite space.
    Classify(SpaceMapArgs),
    /// Check the metric axioms of a space.
    Validate {
        #[arg(long)]
        space: PathBuf,
    },
    /// List every expansive self-map of a finite space.
    Enumerate {
        #[arg(long)]
        space: PathBuf,
    },
    /// First return of a point's orbit to within epsilon.
    Recurrence {
        /// Space document; omit together with --map to use the dial rotation.
        #[arg(long, requires = "map")]
        space: Option<PathBuf>,
        #[arg(long, requires = "space")]
        map: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        point: u64,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iter: u64,
    },
    /// The dial set e^{in} and the rotation by one radian.
    #[command(subcommand)]
    Dial(DialCommand),
    /// Greedy sparse set from a built-in point generator.
    Sparse {
        #[arg(long, value_parser = sparse::ORACLES)]
        oracle: String,
        #[arg(long, default_value_t = 4)]
        count: usize,
        #[arg(long, default_value_t = 100_000)]
        scan_budget: u64,
        #[arg(long, default_value_t = sparse::DEFAULT_MULTIPLIER)]
        multiplier: f64,
        /// Lattice spacing for sup-lattice.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// Base for geometric.
        #[arg(long, default_value_t = 3)]
        base: u32,
    },
    #[command(subcommand)]
    Gallery(GalleryCommand),
    /// Run a verification suite.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct SpaceMapArgs {
    #[arg(long)]
    space: PathBuf,
    #[arg(long)]
    map: PathBuf,
}

#[derive(Subcommand, Debug)]
enum DialCommand {
    /// Indices whose dial points approach e^{i·target}.
    Approach {
        #[arg(long, default_value_t = 0)]
        target: u64,
        #[arg(long, default_value_t = 3)]
        count: usize,
        #[arg(long, default_value_t = dial::DEFAULT_CAPTURE_RADIUS)]
        capture_radius: f64,
    },
    /// Whether the rotated points are epsilon-dense in the first N points.
    Density {
        #[arg(long, default_value_t = 1000)]
        points: usize,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
    },
    /// Densest epsilon-cluster among the first N points.
    LimitPoint {
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long, default_value_t = 1000)]
        points: u64,
    },
}

#[derive(Subcommand, Debug)]
enum GalleryCommand {
    List,
    Run {
        name: String,
        #[arg(long, default_value_t = 1000)]
        max_n: u64,
    },
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(value_parser = suites::SUITES)]
    suite: String,
    /// Largest space size for compact and boundedness.
    #[arg(long, default_value_t = 4)]
    max_size: usize,
    /// Seeded random spaces for compact.
    #[arg(long, default_value_t = 1000)]
    random: usize,
    /// Truncation size for counterexample.
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long, default_value_t = 1000)]
    points: usize,
    #[arg(long, default_value_t = 4)]
    count: usize,
    #[arg(long, default_value_t = 100_000)]
    scan_budget: u64,
}

/// Failure carrying its exit code.
struct Failure {
    code: i32,
    message: String,
    report: Option<Value>,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
            report: None,
        }
    }

    fn invalid(message: impl Into<String>, report: Option<Value>) -> Self {
        Self {
            code: EXIT_INVALID_INPUT,
            message: message.into(),
            report,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::DimensionMismatch(_)
            | Error::MapLength { .. }
            | Error::ImageOutOfRange { .. }
            | Error::NotSelfMap(_)
            | Error::EmptySpace
            | Error::TooFewPoints { .. } => EXIT_INVALID_INPUT,
            Error::CertificateViolation(..) => EXIT_CHECK_FAILED,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
            report: None,
        }
    }
}

/// Output of a successful command.
struct Output {
    value: Value,
    csv: Option<String>,
    text: Option<String>,
    code: i32,
}

impl Output {
    fn json(value: Value) -> Self {
        Self {
            value,
            csv: None,
            text: None,
            code: EXIT_OK,
        }
    }

    fn of<T: Serialize>(v: &T) -> Self {
        Self::json(serde_json::to_value(v).expect("serializable"))
    }
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let cfg = RunConfig {
        seed: cli.seed,
        tol: cli.tol,
        budget: cli.budget,
        format: cli.format,
        workers: cli.workers,
    };
    let cfg = match cfg.validated() {
        Ok(c) => c,
        Err(m) => {
            let _ = writeln!(err, "error: {m}");
            return EXIT_USAGE;
        }
    };
    match execute(cli.command, &cfg) {
        Ok(o) => emit(o, cfg.format, out, err),
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            if let Some(r) = f.report {
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&r).expect("serializable"));
            }
            f.code
        }
    }
}

fn emit(o: Output, format: Format, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let body = match format {
        Format::Json => serde_json::to_string_pretty(&o.value).expect("serializable") + "\n",
        Format::Csv => match o.csv {
            Some(c) => c,
            None => {
                let _ = writeln!(err, "error: csv output is available for dial approach and dial density only");
                return EXIT_USAGE;
            }
        },
        Format::Text => o.text.unwrap_or_else(|| text_lines(&o.value)),
    };
    if out.write_all(body.as_bytes()).is_err() {
        return EXIT_USAGE;
    }
    o.code
}

fn text_lines(v: &Value) -> String {
    let mut s = String::new();
    if let Value::Object(m) = v {
        for (k, v) in m {
            s.push_str(&format!("{k}: {v}\n"));
        }
    } else {
        s.push_str(&format!("{v}\n"));
    }
    s
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::usage(format!("cannot parse {}: {e}", path.display())))
}

fn load_space(path: &Path, tol: f64) -> Result<FiniteMetricSpace, Failure> {
    let doc: SpaceDocument = read_json(path)?;
    let space = FiniteMetricSpace::try_from(doc).map_err(|e| match e {
        Error::InvalidArgument(m) => Failure::usage(m),
        other => Failure::from(other),
    })?;
    let report = validate_metric(&space, tol);
    if !report.valid {
        return Err(Failure::invalid(
            format!("{} is not a metric", path.display()),
            Some(serde_json::to_value(&report).expect("serializable")),
        ));
    }
    Ok(space)
}

fn load_map(path: &Path, space: &FiniteMetricSpace) -> Result<SelfMap, Failure> {
    let map: SelfMap = read_json(path)?;
    map.check_against(space)?;
    Ok(map)
}

fn execute(cmd: Command, cfg: &RunConfig) -> Result<Output, Failure> {
    match cmd {
        Command::Classify(a) => {
            let space = load_space(&a.space, cfg.tol)?;
            let map = load_map(&a.map, &space)?;
            let c = classify_detailed(&space, &map, cfg.tol)?;
            let mut o = Output::of(&c);
            o.text = Some(format!("{}\n", c.class_name));
            Ok(o)
        }
        Command::Validate { space } => {
            let doc: SpaceDocument = read_json(&space)?;
            let space = FiniteMetricSpace::try_from(doc)?;
            let report = validate_metric(&space, cfg.tol);
            let mut o = Output::of(&report);
            if !report.valid {
                o.code = EXIT_INVALID_INPUT;
            }
            Ok(o)
        }
        Command::Enumerate { space } => {
            let space = load_space(&space, cfg.tol)?;
            let e = enumerate_expansive_maps(&space, &cfg.enumeration())?;
            let mut o = Output::of(&e);
            let mut text = format!("{} expansive maps of {} scanned\n", e.expansive.len(), e.total_maps);
            for t in &e.expansive {
                text.push_str(&format!("{:?} {}\n", t.map.images().unwrap_or_default(), t.class.name()));
            }
            o.text = Some(text);
            Ok(o)
        }
        Command::Recurrence {
            space,
            map,
            point,
            epsilon,
            max_iter,
        } => {
            let r: Recurrence = match (space, map) {
                (Some(s), Some(m)) => {
                    let space = load_space(&s, cfg.tol)?;
                    let map = load_map(&m, &space)?;
                    let x = PointId(point as usize);
                    if x.0 >= space.len() {
                        return Err(Failure::usage(format!("point {point} is outside the space")));
                    }
                    recurrence_search(&FiniteSystem { space: &space, map: &map }, &x, epsilon, max_iter)?
                }
                _ => recurrence_search(&dial::DialRotation, &dial::dial_point(point), epsilon, max_iter)?,
            };
            Ok(Output::of(&r))
        }
        Command::Dial(d) => dial_command(d),
        Command::Sparse {
            oracle,
            count,
            scan_budget,
            multiplier,
            scale,
            base,
        } => match oracle.as_str() {
            "integer-line" => sparse_command(&sparse::IntegerLine, count, scan_budget, multiplier),
            "sup-lattice" => sparse_command(&sparse::SupLattice { scale }, count, scan_budget, multiplier),
            "geometric" => sparse_command(&sparse::Geometric { base }, count, scan_budget, multiplier),
            "bounded-interval" => sparse_command(&sparse::BoundedInterval, count, scan_budget, multiplier),
            "dial" => sparse_command(&sparse::DialOracle, count, scan_budget, multiplier),
            other => Err(Failure::usage(format!("unknown oracle {other:?}"))),
        },
        Command::Gallery(GalleryCommand::List) => {
            let entries: Vec<Value> = crate::gallery::ENTRIES
                .iter()
                .map(|(n, d)| json!({ "name": n, "description": d }))
                .collect();
            let mut o = Output::json(Value::Array(entries));
            o.text = Some(crate::gallery::ENTRIES.iter().map(|(n, d)| format!("{n:<18} {d}\n")).collect());
            Ok(o)
        }
        Command::Gallery(GalleryCommand::Run { name, max_n }) => Ok(Output::json(crate::gallery::run(&name, max_n)?)),
        Command::Verify(v) => {
            let scfg = SuiteConfig {
                seed: cfg.seed,
                tol: cfg.tol,
                budget: cfg.budget,
                workers: cfg.workers,
                max_size: v.max_size,
                random_instances: v.random,
                n: v.n,
                epsilon: v.epsilon,
                points: v.points,
                count: v.count,
                scan_budget: v.scan_budget,
            };
            let report = suites::run_suite(&v.suite, &scfg)?;
            let mut o = Output::of(&report);
            o.text = Some(
                report
                    .checks
                    .iter()
                    .map(|c| format!("{} {}\n", if c.pass { "PASS" } else { "FAIL" }, c.name))
                    .collect::<String>()
                    + &format!("{} {}\n", if report.pass { "PASS" } else { "FAIL" }, report.suite),
            );
            if !report.pass {
                o.code = EXIT_CHECK_FAILED;
            }
            Ok(o)
        }
    }
}

fn dial_command(d: DialCommand) -> Result<Output, Failure> {
    match d {
        DialCommand::Approach {
            target,
            count,
            capture_radius,
        } => {
            let s = dial::approach_sequence(target, count, capture_radius)?;
            let mut o = Output::of(&s);
            o.csv = Some(dial::approach_csv(&s));
            Ok(o)
        }
        DialCommand::Density { points, epsilon } => {
            if points == 0 || !(epsilon > 0.0) {
                return Err(Failure::usage("density needs --points >= 1 and --epsilon > 0"));
            }
            let r = dial::range_density_check(points, epsilon)?;
            let mut o = Output::of(&r);
            o.csv = Some(dial::density_csv(points));
            Ok(o)
        }
        DialCommand::LimitPoint { epsilon, points } => Ok(Output::of(&dial::find_limit_point(epsilon, points)?)),
    }
}

fn sparse_command<O: MetricOracle>(oracle: &O, count: usize, budget: u64, multiplier: f64) -> Result<Output, Failure> {
    let set = sparse::greedy_sparse(oracle, count, budget, multiplier)?;
    let certificate = if !set.failed && set.len() >= 3 {
        Some(sparse::certify_anticontraction(&set)?)
    } else {
        None
    };
    let mut o = Output::json(json!({ "set": set, "certificate": certificate }));
    if set.failed {
        o.code = EXIT_CHECK_FAILED;
    }
    Ok(o)
}
