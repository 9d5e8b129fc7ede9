use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Value};

use upperset::continuity::{verdict_matrix, CheckerConfig, Concept, VerdictMatrix};
use upperset::corpus::{builtin, builtin_fixtures, fixture_from_json, random_convex_affine, run_labels, Fixture, FixtureMap};
use upperset::duality::{fundamental_duality, random_pairs, weak_duality_check};
use upperset::rational::{fmt_vec, parse_q, zeros, Q};
use upperset::scalarize::DirectionBase;
use upperset::verdict::Status;
use upperset::Error;

#[derive(Parser)]
#[command(name = "upperset", version, about = "Continuity checks and duality for set-valued maps into upper closed sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verdict matrix of a fixture at one point or at its labeled points
    Check(CheckArgs),
    /// Fundamental duality and weak duality for a bivariate fixture
    Duality(DualityArgs),
    /// Every builtin label plus seeded random convex maps
    Corpus(CorpusArgs),
}

#[derive(Args)]
struct Source {
    /// id of a builtin fixture
    #[arg(long, conflicts_with = "fixture", required_unless_present = "fixture")]
    builtin: Option<String>,
    /// fixture JSON file
    #[arg(long)]
    fixture: Option<PathBuf>,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    delta0: Option<String>,
    #[arg(long)]
    rho: Option<String>,
    /// finest neighbourhood level
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    tol: Option<String>,
    /// half-width of the Z window
    #[arg(long)]
    window: Option<String>,
    /// size of the direction fan
    #[arg(long)]
    base: Option<usize>,
    /// write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// include wall-clock timings (makes the report unstable)
    #[arg(long)]
    timings: bool,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    source: Source,
    /// comma-separated point x0
    #[arg(long)]
    at: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct DualityArgs {
    #[command(flatten)]
    source: Source,
    /// comma-separated x0, defaults to the origin
    #[arg(long)]
    at: Option<String>,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    /// random dual pairs for the weak duality check
    #[arg(long, default_value_t = 50)]
    n_random: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct CorpusArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// random convex affine maps on top of the builtin labels
    #[arg(long, default_value_t = 10)]
    n_random: usize,
    #[command(flatten)]
    common: Common,
}

enum Failure {
    Input(String),
    Refused(Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Run = std::result::Result<(Value, bool), Failure>;

fn config(c: &Common) -> Result<CheckerConfig, Failure> {
    let mut cfg = CheckerConfig::default();
    if let Some(s) = &c.delta0 {
        cfg.delta0 = parse_q(s)?;
    }
    if let Some(s) = &c.rho {
        cfg.rho = parse_q(s)?;
    }
    if let Some(k) = c.levels {
        cfg.levels = k;
        cfg.agree = cfg.agree.min(k + 1);
    }
    if let Some(s) = &c.tol {
        cfg.tol = parse_q(s)?;
    }
    if let Some(s) = &c.window {
        cfg.window_radius = parse_q(s)?;
    }
    if let Some(n) = c.base {
        cfg.fan = n;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse_point(s: &str) -> Result<Vec<Q>, Failure> {
    s.split(',').map(|t| parse_q(t).map_err(Failure::from)).collect()
}

fn load(src: &Source) -> Result<Fixture, Failure> {
    match (&src.builtin, &src.fixture) {
        (Some(id), _) => Ok(builtin(id)?),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            let v: Value =
                serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            Ok(fixture_from_json(&v)?)
        }
        (None, None) => Err(Failure::Input("pass --builtin or --fixture".into())),
    }
}

fn header(command: &str, cfg: &CheckerConfig) -> Value {
    json!({
        "tool": "upperset",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": cfg.to_json(),
    })
}

fn point_record(m: &VerdictMatrix, labels: &[(Concept, Status)]) -> (Value, usize) {
    let mismatches: Vec<Value> = labels
        .iter()
        .filter(|(c, s)| m.status(*c) != *s)
        .map(|(c, s)| json!({"concept": c.name(), "expected": s.label(), "got": m.status(*c).label()}))
        .collect();
    let n = mismatches.len();
    (json!({"matrix": m.to_json(), "mismatches": mismatches}), n)
}

fn check(a: &CheckArgs) -> Run {
    let cfg = config(&a.common)?;
    let fx = load(&a.source)?;
    let map = fx.map.map();
    let points: Vec<(Vec<Q>, Vec<_>)> = match &a.at {
        Some(s) => {
            let x0 = parse_point(s)?;
            let labels = fx.points.iter().find(|p| p.x0 == x0).map(|p| p.labels.clone()).unwrap_or_default();
            vec![(x0, labels)]
        }
        None if fx.points.is_empty() => return Err(Failure::Input(format!("{} has no labeled points, pass --at", fx.id))),
        None => fx.points.iter().map(|p| (p.x0.clone(), p.labels.clone())).collect(),
    };
    let base = DirectionBase::fan(map.cone(), cfg.fan);
    let matrices = points
        .par_iter()
        .map(|(x0, _)| verdict_matrix(map, x0, &cfg, &base))
        .collect::<upperset::Result<Vec<_>>>()?;
    let mut records = Vec::new();
    let mut mismatches = 0;
    let mut violations = 0;
    for (m, (_, labels)) in matrices.iter().zip(&points) {
        let (r, n) = point_record(m, labels);
        records.push(r);
        mismatches += n;
        violations += m.violations.len();
    }
    let mut report = header("check", &cfg);
    report["fixture"] = json!(fx.id);
    report["points"] = Value::Array(records);
    report["summary"] = json!({"label_mismatches": mismatches, "diagram_violations": violations});
    Ok((report, mismatches == 0))
}

fn duality(a: &DualityArgs) -> Run {
    let cfg = config(&a.common)?;
    let fx = load(&a.source)?;
    let f = match &fx.map {
        FixtureMap::Bivariate(b) => b,
        FixtureMap::Single(_) => return Err(Failure::Input(format!("{} is not a bivariate fixture", fx.id))),
    };
    let x0 = match &a.at {
        Some(s) => parse_point(s)?,
        None => zeros(f.n),
    };
    let base = DirectionBase::fan(f.cone(), a.common.base.unwrap_or(16));
    let mut report = header("duality", &cfg);
    report["fixture"] = json!(fx.id);
    report["x0"] = json!(fmt_vec(&x0));
    report["base"] = json!(base.len());
    report["seed"] = json!(a.seed);
    report["n_random"] = json!(a.n_random);
    let pairs = random_pairs(f, a.n_random, a.seed);
    let weak = weak_duality_check(f, &pairs, &[])?;
    report["weak_duality"] = weak.to_json();
    let weak_ok = weak.status != Status::Fails;
    match fundamental_duality(f, &x0, &base, &cfg) {
        Ok(r) => {
            report["duality"] = r.to_json();
            Ok((report, weak_ok))
        }
        Err(Error::RegularityViolated(why)) => {
            report["refused"] = json!(format!("regularity precondition violated: {why}"));
            Err(Failure::Refused(report))
        }
        Err(e) => Err(e.into()),
    }
}

fn corpus(a: &CorpusArgs) -> Run {
    let cfg = config(&a.common)?;
    let fixtures = builtin_fixtures();
    let runs = run_labels(&fixtures, &cfg)?;
    let mut mismatches = 0;
    let mut violations = 0;
    let mut labeled = Vec::new();
    for r in &runs {
        let labels = fixtures
            .iter()
            .find(|f| f.id == r.fixture)
            .and_then(|f| f.points.iter().find(|p| p.x0 == r.matrix.x0))
            .map(|p| p.labels.clone())
            .unwrap_or_default();
        let (mut rec, n) = point_record(&r.matrix, &labels);
        rec["fixture"] = json!(r.fixture);
        mismatches += n;
        violations += r.matrix.violations.len();
        labeled.push(rec);
    }
    let random = (0..a.n_random as u64)
        .into_par_iter()
        .map(|i| {
            let seed = a.seed.wrapping_add(i);
            let (f, points) = random_convex_affine(seed);
            let base = DirectionBase::fan(f.cone(), cfg.fan);
            let mut decisive = 0;
            let mut found = Vec::new();
            for x0 in &points {
                let m = verdict_matrix(&f, x0, &cfg, &base)?;
                decisive += m.verdicts.iter().filter(|(_, v)| v.status.is_decisive()).count();
                found.extend(m.violations.iter().map(|v| json!({"x0": fmt_vec(x0), "violation": v.describe()})));
            }
            Ok(json!({"seed": seed, "points": points.len(), "decisive": decisive, "violations": found}))
        })
        .collect::<upperset::Result<Vec<Value>>>()?;
    violations += random.iter().map(|r| r["violations"].as_array().map_or(0, Vec::len)).sum::<usize>();
    let mut report = header("corpus", &cfg);
    report["seed"] = json!(a.seed);
    report["n_random"] = json!(a.n_random);
    report["labeled"] = Value::Array(labeled);
    report["random"] = Value::Array(random);
    report["summary"] = json!({"label_mismatches": mismatches, "diagram_violations": violations});
    Ok((report, mismatches == 0 && violations == 0))
}

fn emit(report: &Value, out: Option<&PathBuf>) -> Result<(), String> {
    let mut text = serde_json::to_string_pretty(report).map_err(|e| e.to_string())?;
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn init_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("UPPERSET_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| format!("UPPERSET_THREADS must be a positive integer, got {raw:?}"))?;
    if n == 0 {
        return Err("UPPERSET_THREADS must be positive".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let start = Instant::now();
    let (result, common) = match &cli.command {
        Command::Check(a) => (check(a), &a.common),
        Command::Duality(a) => (duality(a), &a.common),
        Command::Corpus(a) => (corpus(a), &a.common),
    };
    let (mut report, ok) = match result {
        Ok(r) => r,
        Err(Failure::Refused(r)) => (r, false),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    report["ok"] = json!(ok);
    if common.timings {
        report["timings"] = json!({"total_seconds": start.elapsed().as_secs_f64()});
    }
    if let Err(e) = emit(&report, common.out.as_ref()) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
