//! `equiline`: build, certify and inspect 2-transitive equiangular line sets.
//!
//! Exit codes: 0 success, 2 invalid parameters or unreadable input,
//! 3 fiducial search did not converge, 4 a certificate failed,
//! 5 the symmetry action could not be certified.

pub mod io;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use equiline_core::action::{certify_action, projector_commutant_dimension, MATCH_TOL};
use equiline_core::fiducial::{construct_sic, SearchConfig};
use equiline_core::finfield::HyperplaneType;
use equiline_core::lineset::{
    certify_equiangular, certify_tight, construct_case_iii, construct_case_iv, dimension_pair, gram,
    is_known_case, tightness_residual, welch_residual, LineSet, CERTIFY_TOL, CONSTRUCTION_TOL,
};
use equiline_core::weil::Parity;
use equiline_core::Error;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::io::{read_lineset, to_json, write_gram_csv, write_lineset, write_manifest, RunManifest};

pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_CERTIFY: i32 = 4;
pub const EXIT_ACTION: i32 = 5;

/// Caps the worker pool used by the numerical kernels.
pub const THREADS_ENV: &str = "EQUILINE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "equiline", version, about = "2-transitive equiangular line sets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a line set and write it as JSON.
    Construct(ConstructArgs),
    /// Check equiangularity, tightness, spanning and the projector commutant.
    Certify(CertifyArgs),
    /// Derive symmetry generators from the file's meta and certify their action.
    Action(ActionArgs),
    /// List the (n, d, n - d) parameters up to n = 4096.
    Table,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Case {
    I,
    Ii,
    Iii,
    Iv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Sign {
    Plus,
    Minus,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[arg(long = "case", value_enum)]
    pub case: Case,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub p: Option<u32>,
    /// Hyperplane type for case iii.
    #[arg(long = "type", value_enum)]
    pub kind: Option<Sign>,
    /// Parity eigenspace for case iv.
    #[arg(long, value_enum)]
    pub eigen: Option<Sign>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Output file; JSON goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub gram_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    pub input: PathBuf,
    #[arg(long, default_value_t = CERTIFY_TOL)]
    pub tol: f64,
    /// Also write the report as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub gram_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ActionArgs {
    pub input: PathBuf,
    #[arg(long, default_value_t = MATCH_TOL)]
    pub tol: f64,
    /// Write the certificate here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        CliError { code, message: message.into() }
    }

    fn invalid(message: impl Into<String>) -> Self {
        CliError::new(EXIT_INVALID, message)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::invalid(e.to_string())
    }
}

/// Builds the global worker pool, honouring `EQUILINE_THREADS`.
pub fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::invalid(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    // a second call in the same process is harmless
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

/// Runs a parsed command, returning what to print on stdout.
pub fn run(cli: Cli) -> Result<String, CliError> {
    init_threads()?;
    match cli.command {
        Command::Construct(args) => construct(&args),
        Command::Certify(args) => certify(&args),
        Command::Action(args) => action(&args),
        Command::Table => Ok(table()),
    }
}

fn require<T>(value: Option<T>, flag: &str, case: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::invalid(format!("case {case} requires {flag}")))
}

fn reject(present: bool, flag: &str, case: &str) -> Result<(), CliError> {
    if present {
        return Err(CliError::invalid(format!("{flag} does not apply to case {case}")));
    }
    Ok(())
}

fn core_to_cli(e: Error) -> CliError {
    match e {
        Error::NotConverged { best_value, best_excess } => CliError::new(
            EXIT_NOT_CONVERGED,
            format!("fiducial search did not converge: best frame potential {best_value:.17e} (excess {best_excess:.3e})"),
        ),
        other => CliError::invalid(other.to_string()),
    }
}

pub fn build_lineset(args: &ConstructArgs) -> Result<LineSet, CliError> {
    match args.case {
        Case::I | Case::Ii => {
            let name = if args.case == Case::I { "i" } else { "ii" };
            reject(args.m.is_some(), "--m", name)?;
            reject(args.p.is_some(), "--p", name)?;
            reject(args.kind.is_some(), "--type", name)?;
            reject(args.eigen.is_some(), "--eigen", name)?;
            let d = if args.case == Case::I { 2 } else { 8 };
            let mut cfg = SearchConfig::new(d, args.seed);
            if let Some(r) = args.restarts {
                cfg.restarts = r;
            }
            if let Some(it) = args.max_iters {
                cfg.max_iters = it;
            }
            construct_sic(&cfg).map(|(l, _)| l).map_err(core_to_cli)
        }
        Case::Iii => {
            reject(args.p.is_some(), "--p", "iii")?;
            reject(args.eigen.is_some(), "--eigen", "iii")?;
            let m = require(args.m, "--m", "iii")?;
            let kind = match require(args.kind, "--type", "iii")? {
                Sign::Plus => HyperplaneType::Plus,
                Sign::Minus => HyperplaneType::Minus,
            };
            construct_case_iii(m, kind).map_err(core_to_cli)
        }
        Case::Iv => {
            reject(args.kind.is_some(), "--type", "iv")?;
            let p = require(args.p, "--p", "iv")?;
            let m = require(args.m, "--m", "iv")?;
            let eigen = match require(args.eigen, "--eigen", "iv")? {
                Sign::Plus => Parity::Plus,
                Sign::Minus => Parity::Minus,
            };
            construct_case_iv(p, m, eigen).map_err(core_to_cli)
        }
    }
}

fn construct(args: &ConstructArgs) -> Result<String, CliError> {
    let l = build_lineset(args)?;
    if let Some(path) = &args.gram_csv {
        write_gram_csv(path, &gram(&l))?;
    }
    let Some(out) = &args.out else {
        return to_json(&io::LineSetFile::from_lineset(&l)).map_err(|e| CliError::invalid(e.to_string()));
    };
    write_lineset(out, &l)?;
    let mut parameters = Map::new();
    if let Some(Value::Object(meta)) = l.meta().map(|m| serde_json::to_value(m).expect("meta serializes")) {
        parameters = meta;
    }
    let stochastic = matches!(args.case, Case::I | Case::Ii);
    let mut tolerances = Map::new();
    tolerances.insert("construction".into(), json!(CONSTRUCTION_TOL));
    let manifest = RunManifest::new("construct", parameters, stochastic.then_some(args.seed), tolerances);
    write_manifest(out, &manifest)?;
    Ok(format!(
        "case {} n={} d={} -> {}\n",
        l.meta().map_or("?", |m| m.tag()),
        l.n(),
        l.d(),
        out.display()
    ))
}

/// Outcome of `certify`. Fields are `None` when a certificate could not be
/// computed.
#[derive(Clone, Debug, Serialize)]
pub struct CertifyReport {
    pub n: usize,
    pub d: usize,
    pub tol: f64,
    pub alpha: Option<f64>,
    pub alpha_exact: Option<(i64, i64)>,
    pub max_dev: Option<f64>,
    pub exact: bool,
    pub worst_pair: Option<(usize, usize)>,
    pub welch_residual: Option<f64>,
    pub tight: bool,
    pub tightness_residual: f64,
    pub commutant_dimension: usize,
    pub rank: usize,
    pub companion_dimension: Option<usize>,
    pub passed: bool,
    /// Name of the first failing certificate.
    pub failure: Option<String>,
}

pub fn certify_lineset(l: &LineSet, tol: f64) -> CertifyReport {
    let g = gram(l);
    let angle = certify_equiangular(&g, tol);
    let tight = certify_tight(&g, l.d(), tol);
    let commutant_dimension = projector_commutant_dimension(l);
    let rank = l.rank();
    let mut failure = None;
    let (alpha, alpha_exact, max_dev, exact, worst_pair) = match &angle {
        Ok(cert) => (Some(cert.alpha), cert.alpha_exact, Some(cert.max_dev), cert.exact, Some(cert.worst_pair)),
        Err(Error::NotEquiangular { i, j, deviation }) => {
            failure = Some(format!("NotEquiangular (lines {i}, {j}, deviation {deviation:.3e})"));
            (None, None, Some(*deviation), g.exact().is_some(), Some((*i, *j)))
        }
        Err(e) => {
            failure = Some(format!("NotEquiangular ({e})"));
            (None, None, None, false, None)
        }
    };
    if failure.is_none() && !tight {
        failure = Some("NotTight".to_string());
    }
    if failure.is_none() && commutant_dimension != 1 {
        failure = Some(format!("NontrivialCommutant (dimension {commutant_dimension})"));
    }
    if failure.is_none() && rank < l.d() {
        failure = Some(format!("SpanDeficient (rank {rank} < {})", l.d()));
    }
    CertifyReport {
        n: l.n(),
        d: l.d(),
        tol,
        alpha,
        alpha_exact,
        max_dev,
        exact,
        worst_pair,
        welch_residual: alpha.map(|a| welch_residual(a, l.n(), l.d())),
        tight,
        tightness_residual: tightness_residual(&g, l.d()),
        commutant_dimension,
        rank,
        companion_dimension: is_known_case(l.n(), l.d()).then(|| dimension_pair(l.n(), l.d()).ok()).flatten(),
        passed: failure.is_none(),
        failure,
    }
}

fn render_report(r: &CertifyReport) -> String {
    let fmt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.17}"));
    let mut s = String::new();
    s += &format!("n = {}, d = {}, tol = {:e}\n", r.n, r.d, r.tol);
    let alpha = match r.alpha_exact {
        Some((p, q)) => format!("{} = {p}/{q} (exact)", fmt(r.alpha)),
        None => fmt(r.alpha),
    };
    s += &format!("alpha              {alpha}\n");
    s += &format!("max_dev            {}\n", fmt(r.max_dev));
    s += &format!("welch residual     {}\n", r.welch_residual.map_or("-".into(), |w| format!("{w:.3e}")));
    s += &format!("tight              {} (residual {:.3e})\n", r.tight, r.tightness_residual);
    s += &format!("commutant dim      {}\n", r.commutant_dimension);
    s += &format!("rank               {}\n", r.rank);
    if let Some(mate) = r.companion_dimension {
        s += &format!("companion dim      {mate} (d + d' = {})\n", r.d + mate);
    }
    match &r.failure {
        None => s += "PASS\n",
        Some(f) => s += &format!("FAIL {f}\n"),
    }
    s
}

fn certify(args: &CertifyArgs) -> Result<String, CliError> {
    if !(args.tol > 0.0) {
        return Err(CliError::invalid("--tol must be positive"));
    }
    let l = read_lineset(&args.input).map_err(CliError::invalid)?;
    if let Some(path) = &args.gram_csv {
        write_gram_csv(path, &gram(&l))?;
    }
    let report = certify_lineset(&l, args.tol);
    if let Some(out) = &args.out {
        fs::write(out, to_json(&report).map_err(|e| CliError::invalid(e.to_string()))?)?;
    }
    let text = render_report(&report);
    match &report.failure {
        None => Ok(text),
        Some(f) => Err(CliError::new(EXIT_CERTIFY, format!("{text}certificate failed: {f}"))),
    }
}

fn action(args: &ActionArgs) -> Result<String, CliError> {
    let l = read_lineset(&args.input).map_err(CliError::invalid)?;
    let cert = certify_action(&l, args.tol).map_err(|e| CliError::new(EXIT_ACTION, e.to_string()))?;
    let text = to_json(&cert).map_err(|e| CliError::invalid(e.to_string()))?;
    write_or_return(args.out.as_deref(), text)
}

fn write_or_return(out: Option<&Path>, text: String) -> Result<String, CliError> {
    match out {
        Some(path) => {
            fs::write(path, &text)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

/// One row of the parameter table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableRow {
    pub case: &'static str,
    pub n: usize,
    pub d: usize,
    pub mate: usize,
    pub command: Option<String>,
}

/// Rows with `n` at most this size come with a construct command.
pub const DESK_SCALE: usize = 1024;

pub fn table_rows(limit: usize) -> Vec<TableRow> {
    let mut rows = Vec::new();
    let mut push = |case, n: usize, d, command: String| {
        if n <= limit {
            rows.push(TableRow { case, n, d, mate: n - d, command: (n <= DESK_SCALE).then_some(command) });
        }
    };
    push("i", 4, 2, "equiline construct --case i --seed 1".into());
    push("ii", 64, 8, "equiline construct --case ii --seed 1".into());
    for m in 2.. {
        let q = 1usize << m;
        if q * q > limit {
            break;
        }
        for (kind, d) in [("minus", q / 2 * (q - 1)), ("plus", q / 2 * (q + 1))] {
            push("iii", q * q, d, format!("equiline construct --case iii --m {m} --type {kind}"));
        }
    }
    for p in (3u32..).step_by(2) {
        if (p as usize).pow(2) > limit {
            break;
        }
        if !equiline_core::heisenberg::is_prime(p) {
            continue;
        }
        for m in 1.. {
            let q = (p as usize).pow(m);
            if q * q > limit {
                break;
            }
            for (kind, d) in [("minus", q * (q - 1) / 2), ("plus", q * (q + 1) / 2)] {
                push("iv", q * q, d, format!("equiline construct --case iv --p {p} --m {m} --eigen {kind}"));
            }
        }
    }
    rows.sort_by_key(|r| (r.n, r.case, r.d));
    rows
}

fn table() -> String {
    let mut s = format!("{:<5} {:>6} {:>6} {:>6}  command\n", "case", "n", "d", "n-d");
    for r in table_rows(4096) {
        s += &format!("{:<5} {:>6} {:>6} {:>6}  {}\n", r.case, r.n, r.d, r.mate, r.command.as_deref().unwrap_or("-"));
    }
    s
}
