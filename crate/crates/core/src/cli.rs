//! Command-line front end.
//!
//! Exit status: 0 when every check passes, 1 when any fails, 2 on a usage
//! error, 3 when the output cannot be written.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::Serialize;

use crate::error::Error;
use crate::operators::shift;
use crate::scalar::{Alpha, Real, ScalarMode};
use crate::subspaces::{reducing_census, CensusReport, Residues};
use crate::verify::{
    default_grid, run_suite, CheckKind, CheckParams, CheckSpec, Entry, Perturbation, Summary,
    VerificationReport,
};
use crate::weights::{lower_bound, shift_coeff, weight_sequence, WeightParams};

pub const SUITE_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const THREADS_ENV: &str = "BERGMAN_LAB_THREADS";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "bergman-lab", version, about = "Finite-section checks for shifts on weighted Bergman spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,

    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Table of the weights w_n.
    Weights(PointArgs),
    /// Table of the shift coefficients C(N, alpha, n).
    Coeffs(PointArgs),
    /// Run one or more checks at a single parameter point.
    Verify(VerifyArgs),
    /// Run the wandering-subspace reconstruction check.
    Beurling(CheckArgs),
    /// Reducing-subspace census: residue subspaces against random ones.
    Census(CensusArgs),
    /// Run a whole parameter grid.
    Suite(SuiteArgs),
}

#[derive(Debug, Args)]
pub struct PointArgs {
    /// Shift multiplicity.
    #[arg(long = "N", default_value_t = 1)]
    pub multiplicity: usize,

    /// Weight parameter: a decimal or a p/q rational.
    #[arg(long, default_value = "0", value_parser = parse_alpha, allow_hyphen_values = true)]
    pub alpha: Alpha,

    /// Truncation dimension D.
    #[arg(long, default_value_t = 32)]
    pub dim: usize,

    /// Scalar mode; p/q alphas default to exact, decimals to float64.
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<ScalarMode>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub point: PointArgs,

    /// Residue classes mod N, comma separated, or "all".
    #[arg(long, default_value = "all")]
    pub residues: String,

    /// Ladder depth (number of shift applications).
    #[arg(long, default_value_t = 4)]
    pub depth: usize,

    /// Tolerance for float mode.
    #[arg(long)]
    pub tol: Option<f64>,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Add 1e-6 to the shift coefficient at this degree.
    #[arg(long)]
    pub perturb: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub check: CheckArgs,

    /// Checks to run (repeatable); all when omitted.
    #[arg(long = "check", value_parser = parse_kind)]
    pub kinds: Vec<CheckKind>,
}

#[derive(Debug, Args)]
pub struct CensusArgs {
    #[command(flatten)]
    pub point: PointArgs,

    /// Random non-residue subspaces to test.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SuiteArgs {
    /// Named grid.
    #[arg(long, default_value = "default", value_parser = ["default"])]
    pub grid: String,

    /// Add 1e-6 to the shift coefficient at this degree in every check.
    #[arg(long)]
    pub perturb: Option<usize>,
}

fn parse_alpha(s: &str) -> Result<Alpha, String> {
    let a = Alpha::parse(s).map_err(|e| e.to_string())?;
    if a.is_valid() {
        Ok(a)
    } else {
        Err(Error::InvalidAlpha(s.to_string()).to_string())
    }
}

fn parse_mode(s: &str) -> Result<ScalarMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_kind(s: &str) -> Result<CheckKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_residues(s: &str, multiplicity: usize) -> Result<Residues, Error> {
    let t = s.trim();
    if t == "all" {
        return Ok(Residues::all(multiplicity));
    }
    if t.is_empty() || t == "none" {
        return Residues::new(multiplicity, []);
    }
    let classes = t
        .split(',')
        .map(|c| {
            c.trim().parse::<usize>().map_err(|_| Error::Parse {
                what: "residue class",
                input: c.to_string(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Residues::new(multiplicity, classes)
}

/// A usage error found after clap has parsed the flags.
struct Usage {
    flag: &'static str,
    error: Error,
}

fn usage(flag: &'static str) -> impl Fn(Error) -> Usage {
    move |error| Usage { flag, error }
}

impl PointArgs {
    /// The requested mode, falling back to float64 when alpha has no exact value.
    fn resolved_mode(&self) -> ScalarMode {
        let wanted = self.mode.unwrap_or(if self.alpha.is_ratio_literal() {
            ScalarMode::ExactRational
        } else {
            ScalarMode::Float64
        });
        if wanted == ScalarMode::ExactRational && self.alpha.exact().is_none() {
            eprintln!(
                "warning: alpha = {} has no exact rational value; using float64",
                self.alpha
            );
            return ScalarMode::Float64;
        }
        wanted
    }

    fn weight_params(&self) -> Result<WeightParams, Usage> {
        WeightParams::new(self.alpha.clone(), self.multiplicity, self.dim).map_err(|e| {
            let flag = match e {
                Error::InvalidAlpha(_) => "--alpha",
                _ if self.multiplicity == 0 => "--N",
                _ => "--dim",
            };
            Usage { flag, error: e }
        })
    }
}

impl CheckArgs {
    fn specs(&self, kinds: &[CheckKind]) -> Result<Vec<CheckSpec>, Usage> {
        let p = &self.point;
        p.weight_params()?;
        let residues = parse_residues(&self.residues, p.multiplicity).map_err(usage("--residues"))?;
        let params = CheckParams {
            multiplicity: p.multiplicity,
            alpha: p.alpha.clone(),
            dim: p.dim,
            residues,
            depth: self.depth,
            seed: self.seed,
        };
        let mode = p.resolved_mode();
        kinds
            .iter()
            .map(|&kind| {
                let mut spec = CheckSpec::new(kind, params.clone(), mode).map_err(usage("--depth"))?;
                if let Some(tol) = self.tol {
                    spec = spec.with_tol(tol).map_err(usage("--tol"))?;
                }
                if let Some(degree) = self.perturb {
                    spec = spec
                        .with_perturbation(Perturbation::new(degree))
                        .map_err(usage("--perturb"))?;
                }
                Ok(spec)
            })
            .collect()
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return EXIT_USAGE;
    }
    match execute(&cli) {
        Ok(Output { text, status }) => match write_output(cli.out.as_ref(), &text) {
            Ok(()) => status,
            Err(e) => {
                let target = cli.out.as_ref().map_or("stdout".to_string(), |p| p.display().to_string());
                eprintln!("error: cannot write {target}: {e}");
                EXIT_IO
            }
        },
        Err(Usage { flag, error }) => {
            eprintln!("error: invalid value for '{flag}': {error}");
            EXIT_USAGE
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_ENV} must be a positive integer, got '{raw}'"))?;
    // A pool may already exist when `run` is called twice in one process.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

fn write_output(path: Option<&PathBuf>, text: &str) -> io::Result<()> {
    match path {
        Some(p) => {
            let mut f = File::create(p)?;
            f.write_all(text.as_bytes())?;
            f.flush()
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

struct Output {
    text: String,
    status: i32,
}

fn execute(cli: &Cli) -> Result<Output, Usage> {
    match &cli.command {
        Command::Weights(p) => weights_table(p, cli.format, false),
        Command::Coeffs(p) => weights_table(p, cli.format, true),
        Command::Verify(v) => {
            let kinds = if v.kinds.is_empty() { CheckKind::ALL.to_vec() } else { v.kinds.clone() };
            Ok(report_output(&run_suite(&v.check.specs(&kinds)?), cli.format))
        }
        Command::Beurling(c) => Ok(report_output(&run_suite(&c.specs(&[CheckKind::Beurling])?), cli.format)),
        Command::Census(c) => census(c, cli.format),
        Command::Suite(s) => {
            let mut grid = default_grid();
            if let Some(degree) = s.perturb {
                grid = grid
                    .into_iter()
                    .map(|spec| spec.with_perturbation(Perturbation::new(degree)))
                    .collect::<Result<_, _>>()
                    .map_err(usage("--perturb"))?;
            }
            Ok(report_output(&run_suite(&grid), cli.format))
        }
    }
}

#[derive(Serialize)]
struct CoeffRow {
    n: usize,
    weight: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    shift_coeff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lower_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<String>,
}

fn weights_table(p: &PointArgs, format: Format, with_coeffs: bool) -> Result<Output, Usage> {
    let params = p.weight_params()?;
    let rows = match p.resolved_mode() {
        ScalarMode::Float64 => table::<f64>(&params, with_coeffs),
        ScalarMode::ExactRational => table::<BigRational>(&params, with_coeffs),
    }
    .map_err(usage("--alpha"))?;
    let text = match format {
        Format::Json => json(&rows),
        Format::Csv => csv_rows(&rows),
        Format::Text => rows
            .iter()
            .map(|r| {
                let mut line = format!("{:>5}  {:<24e}", r.n, r.weight);
                if let (Some(c), Some(b)) = (r.shift_coeff, r.lower_bound) {
                    line += &format!("  {c:<24e}  {b:e}");
                }
                if let Some(x) = &r.exact {
                    line += &format!("  {x}");
                }
                line + "\n"
            })
            .collect(),
    };
    Ok(Output { text, status: EXIT_PASS })
}

fn table<R: Real>(params: &WeightParams, with_coeffs: bool) -> crate::Result<Vec<CoeffRow>> {
    let w = weight_sequence::<R>(params)?;
    let n = params.multiplicity();
    let lb = lower_bound::<R>(n, params.alpha())?;
    w.values()
        .iter()
        .enumerate()
        .map(|(k, wk)| {
            let c = if with_coeffs {
                Some(shift_coeff::<R>(n, params.alpha(), k)?)
            } else {
                None
            };
            let exact = R::is_exact().then(|| match &c {
                Some(c) => format!("{}  {}", wk.render(), c.render()),
                None => wk.render(),
            });
            Ok(CoeffRow {
                n: k,
                weight: wk.to_f64(),
                shift_coeff: c.as_ref().map(Real::to_f64),
                lower_bound: with_coeffs.then(|| lb.to_f64()),
                exact,
            })
        })
        .collect()
}

fn json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn csv_rows<T: Serialize>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv output is utf-8")
}

#[derive(Serialize)]
struct JsonReport<'a> {
    suite_version: &'a str,
    entries: Vec<JsonEntry>,
    summary: Summary,
}

#[derive(Serialize)]
struct JsonEntry {
    name: &'static str,
    params: JsonParams,
    residual: Option<f64>,
    tol: f64,
    pass: bool,
    wall_ms: f64,
}

#[derive(Serialize)]
struct JsonParams {
    #[serde(rename = "N")]
    n: usize,
    alpha: String,
    #[serde(rename = "D")]
    d: usize,
    residues: Vec<usize>,
    depth: usize,
    seed: u64,
    mode: String,
}

#[derive(Serialize)]
struct CsvEntry {
    name: &'static str,
    #[serde(rename = "N")]
    n: usize,
    alpha: String,
    #[serde(rename = "D")]
    d: usize,
    residues: String,
    depth: usize,
    seed: u64,
    mode: String,
    residual: Option<f64>,
    tol: f64,
    pass: bool,
    wall_ms: f64,
}

fn json_entry(e: &Entry) -> JsonEntry {
    let p = &e.spec.params;
    JsonEntry {
        name: e.spec.name(),
        params: JsonParams {
            n: p.multiplicity,
            alpha: p.alpha.to_string(),
            d: p.dim,
            residues: p.residues.classes().iter().copied().collect(),
            depth: p.depth,
            seed: p.seed,
            mode: e.spec.mode.to_string(),
        },
        residual: e.residual,
        tol: e.spec.tol,
        pass: e.pass,
        wall_ms: e.wall_ms,
    }
}

/// The report as JSON.
pub fn report_json(report: &VerificationReport) -> String {
    json(&JsonReport {
        suite_version: SUITE_VERSION,
        entries: report.entries.iter().map(json_entry).collect(),
        summary: report.summary(),
    })
}

/// The report as CSV, one row per entry under a header row.
pub fn report_csv(report: &VerificationReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    // The header is written explicitly so an empty report still has one.
    w.write_record([
        "name", "N", "alpha", "D", "residues", "depth", "seed", "mode", "residual", "tol", "pass", "wall_ms",
    ])
    .expect("in-memory csv write");
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(w.into_inner().expect("flush"));
    for e in &report.entries {
        let j = json_entry(e);
        let p = j.params;
        w.serialize(CsvEntry {
            name: j.name,
            n: p.n,
            alpha: p.alpha,
            d: p.d,
            residues: p.residues.iter().map(usize::to_string).collect::<Vec<_>>().join(","),
            depth: p.depth,
            seed: p.seed,
            mode: p.mode,
            residual: j.residual,
            tol: j.tol,
            pass: j.pass,
            wall_ms: j.wall_ms,
        })
        .expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv output is utf-8")
}

/// The report as aligned text, failures and notes included.
pub fn report_text(report: &VerificationReport) -> String {
    let mut out = String::new();
    for e in &report.entries {
        let p = &e.spec.params;
        let residual = e.residual.map_or("-".to_string(), |r| format!("{r:.3e}"));
        out += &format!(
            "{} {:<18} N={} alpha={:<5} D={:<3} residues={:<12} depth={} {:<7} residual={:<10} tol={:.0e}",
            if e.pass { "PASS" } else { "FAIL" },
            e.spec.name(),
            p.multiplicity,
            p.alpha.to_string(),
            p.dim,
            p.residues.to_string(),
            p.depth,
            e.spec.mode.to_string(),
            residual,
            e.spec.tol,
        );
        if !e.note.is_empty() {
            out += &format!("  ({})", e.note);
        }
        out.push('\n');
    }
    let s = report.summary();
    out += &format!("{} checks: {} passed, {} failed\n", s.total, s.passed, s.failed);
    out
}

fn report_output(report: &VerificationReport, format: Format) -> Output {
    let text = match format {
        Format::Json => report_json(report),
        Format::Csv => report_csv(report),
        Format::Text => report_text(report),
    };
    Output {
        text,
        status: if report.all_pass() { EXIT_PASS } else { EXIT_FAIL },
    }
}

#[derive(Serialize)]
struct CensusOutput {
    #[serde(rename = "N")]
    n: usize,
    alpha: String,
    #[serde(rename = "D")]
    d: usize,
    mode: String,
    seed: u64,
    tol: f64,
    #[serde(flatten)]
    report: CensusReport,
    pass: bool,
}

fn census(c: &CensusArgs, format: Format) -> Result<Output, Usage> {
    let params = c.point.weight_params()?;
    let mode = c.point.resolved_mode();
    let tol = c.tol.unwrap_or(1e-10);
    let report = match mode {
        ScalarMode::Float64 => census_in::<f64>(&params, c.trials, c.seed, tol),
        ScalarMode::ExactRational => census_in::<BigRational>(&params, c.trials, c.seed, 0.0),
    }
    .map_err(usage("--alpha"))?;
    let out = CensusOutput {
        n: params.multiplicity(),
        alpha: params.alpha().to_string(),
        d: params.dim(),
        mode: mode.to_string(),
        seed: c.seed,
        tol,
        pass: report.all_pass(),
        report,
    };
    let text = match format {
        Format::Json => json(&out),
        Format::Csv => csv_rows(std::slice::from_ref(&out)),
        Format::Text => {
            let r = &out.report;
            format!(
                "residue subspaces reducing: {}/{} (max residual {:e})\n\
                 random subspaces not reducing: {}/{} (min residual {:e})\n{}\n",
                r.residue_passed,
                r.residue_total,
                r.max_residue_residual,
                r.random_failed,
                r.random_total,
                r.min_random_residual,
                if out.pass { "PASS" } else { "FAIL" }
            )
        }
    };
    let status = if out.pass { EXIT_PASS } else { EXIT_FAIL };
    Ok(Output { text, status })
}

fn census_in<R: Real>(params: &WeightParams, trials: usize, seed: u64, tol: f64) -> crate::Result<CensusReport> {
    let n = params.multiplicity();
    let long = WeightParams::new(params.alpha().clone(), n, params.dim() + n)?;
    let w = weight_sequence::<R>(&long)?;
    let s = shift(&w.space(params.dim())?, &w.space(params.dim() + n)?, n)?;
    reducing_census(&s, n, trials, seed, tol)
}
