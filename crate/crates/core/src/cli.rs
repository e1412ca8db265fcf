//! Command-line interface: `pareto`, `verify`, `perturb`, `diff-probe` and
//! `catalog list`.
//!
//! Every option can also be set through an environment variable named
//! `SIMPLICIAL_<OPTION>`, e.g. `SIMPLICIAL_TOL_X=1e-10`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::catalog::{self, Params};
use crate::error::Error;
use crate::pareto::{sample_pareto_unchecked, x_star, ParetoOptions};
use crate::perturbation::{genericity_experiment, GenericityConfig, GenericityStats};
use crate::problem::ProblemInstance;
use crate::rank::DEFAULT_RANK_THRESHOLD;
use crate::solver::{DEFAULT_MAX_ITER, DEFAULT_TOL_X};
use crate::verify::{build_report, SimplicialityReport, Verdict, VerifyConfig};
use crate::weights::{simplex_grid, WeightVector};

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_IO: i32 = 74;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Library(#[from] Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Library(_) => EXIT_USAGE,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "simplicial", version, about = "Pareto sets of strongly convex problems via weighted-sum scalarization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample x*(w) on the simplex lattice and write one CSV row per weight.
    Pareto(RunArgs),
    /// Run every simpliciality check and report a verdict.
    Verify(RunArgs),
    /// Monte-Carlo rank-condition experiment under random linear perturbations.
    Perturb(PerturbArgs),
    /// One-sided difference quotients of x* along a path in the simplex.
    DiffProbe(DiffProbeArgs),
    /// Built-in problems.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum CatalogAction {
    /// List problem names, parameters and definitions.
    List {
        #[arg(long, value_enum, env = "SIMPLICIAL_FORMAT")]
        format: Option<Format>,
        #[arg(long, env = "SIMPLICIAL_OUTPUT")]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long, env = "SIMPLICIAL_PROBLEM")]
    pub problem: String,
    /// Stretch parameter of `example1`.
    #[arg(long, env = "SIMPLICIAL_A")]
    pub a: Option<f64>,
    /// Dimension of `remark4_identical_norms`.
    #[arg(long, env = "SIMPLICIAL_N")]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 20, env = "SIMPLICIAL_RESOLUTION")]
    pub resolution: usize,
    #[arg(long, default_value_t = DEFAULT_TOL_X, env = "SIMPLICIAL_TOL_X")]
    pub tol_x: f64,
    #[arg(long, default_value_t = DEFAULT_RANK_THRESHOLD, env = "SIMPLICIAL_RANK_THRESHOLD")]
    pub rank_threshold: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER, env = "SIMPLICIAL_MAX_ITER")]
    pub max_iter: usize,
    #[arg(long, default_value_t = 0, env = "SIMPLICIAL_SEED")]
    pub seed: u64,
    /// Write here (atomically) instead of stdout.
    #[arg(long, env = "SIMPLICIAL_OUTPUT")]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, env = "SIMPLICIAL_FORMAT")]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct PerturbArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// One-based objective indices whose perturbation row is fixed at zero.
    #[arg(long, value_delimiter = ',', default_value = "1", env = "SIMPLICIAL_ZERO_ROWS")]
    pub zero_rows: Vec<usize>,
    #[arg(long, default_value_t = 100, env = "SIMPLICIAL_TRIALS")]
    pub trials: usize,
    /// Half-width of the uniform distribution of perturbation entries.
    #[arg(long, default_value_t = 1.0, env = "SIMPLICIAL_SCALE")]
    pub scale: f64,
}

#[derive(Debug, Clone, Args)]
pub struct DiffProbeArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// `edge:i,j` is t ↦ t·eᵢ + (1 − t)·eⱼ with one-based i ≠ j.
    #[arg(long, default_value = "edge:1,2", env = "SIMPLICIAL_PATH")]
    pub path: String,
    /// Path parameters to probe.
    #[arg(long, value_delimiter = ',', default_value = "0.5", env = "SIMPLICIAL_AT")]
    pub at: Vec<f64>,
    #[arg(long, default_value_t = 1e-4, env = "SIMPLICIAL_H")]
    pub h: f64,
}

/// Validated problem and numerical settings shared by all commands.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub problem: String,
    pub params: Params,
    pub resolution: usize,
    pub tol_x: f64,
    pub rank_threshold: f64,
    pub max_iter: usize,
    pub seed: u64,
    #[serde(skip)]
    pub output: Option<PathBuf>,
    #[serde(skip)]
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn from_args(args: &RunArgs) -> Result<Self, CliError> {
        if args.resolution < 1 {
            return Err(CliError::Usage("--resolution must be at least 1".into()));
        }
        if !(args.tol_x > 0.0) || !args.tol_x.is_finite() {
            return Err(CliError::Usage(format!("--tol-x must be positive, got {}", args.tol_x)));
        }
        if !(args.rank_threshold > 0.0 && args.rank_threshold < 1.0) {
            return Err(CliError::Usage(format!(
                "--rank-threshold must lie in (0, 1), got {}",
                args.rank_threshold
            )));
        }
        let mut params = Params::new();
        if let Some(a) = args.a {
            params.insert("a".into(), a);
        }
        if let Some(n) = args.n {
            params.insert("n".into(), n as f64);
        }
        Ok(Self {
            problem: args.problem.clone(),
            params,
            resolution: args.resolution,
            tol_x: args.tol_x,
            rank_threshold: args.rank_threshold,
            max_iter: args.max_iter,
            seed: args.seed,
            output: args.output.clone(),
            format: args.format,
        })
    }

    pub fn instance(&self) -> Result<ProblemInstance, CliError> {
        Ok(catalog::get(&self.problem, &self.params)?)
    }

    pub fn pareto_options(&self) -> ParetoOptions {
        ParetoOptions {
            tol_x: self.tol_x,
            max_iter: self.max_iter,
            rank_threshold: self.rank_threshold,
            warm_start: true,
        }
    }

    fn problem_record(&self) -> serde_json::Value {
        json!({ "name": self.problem, "params": self.params })
    }
}

/// Rendered output and the exit code it implies.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub body: String,
    pub code: i32,
}

/// Shortest round-trip decimal, matching the JSON output.
fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        serde_json::to_string(&v).expect("finite floats serialize")
    } else {
        format!("{v}")
    }
}

fn csv_string(header: &[String], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io {
        path: "<buffer>".into(),
        source: std::io::Error::other(e),
    };
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io {
        path: "<buffer>".into(),
        source: e.into_error(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Header `w_1..w_m,x_1..x_n,f_1..f_m,kkt_residual,rank,error_radius`.
pub fn pareto_header(m: usize, n: usize) -> Vec<String> {
    let mut h: Vec<String> = (1..=m).map(|i| format!("w_{i}")).collect();
    h.extend((1..=n).map(|i| format!("x_{i}")));
    h.extend((1..=m).map(|i| format!("f_{i}")));
    h.extend(["kkt_residual", "rank", "error_radius"].map(String::from));
    h
}

pub fn cmd_pareto(config: &RunConfig) -> Result<Outcome, CliError> {
    let problem = config.instance()?;
    let grid = simplex_grid(problem.m(), config.resolution)?;
    let samples = sample_pareto_unchecked(&problem, &grid, &config.pareto_options())?;
    let code = if samples.iter().all(|s| s.converged) { EXIT_OK } else { 2 };
    let body = match config.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let rows: Vec<Vec<String>> = samples
                .iter()
                .map(|s| {
                    let mut r: Vec<String> = s.w.coordinates().iter().map(|&v| fmt_f64(v)).collect();
                    r.extend(s.x.iter().map(|&v| fmt_f64(v)));
                    r.extend(s.f_values.iter().map(|&v| fmt_f64(v)));
                    r.push(fmt_f64(s.kkt_residual));
                    r.push(s.jacobian_rank.to_string());
                    r.push(fmt_f64(s.error_radius));
                    r
                })
                .collect();
            csv_string(&pareto_header(problem.m(), problem.n()), &rows)?
        }
        Format::Json => json_string(&json!({
            "schema_version": SCHEMA_VERSION,
            "problem": config.problem_record(),
            "config": config,
            "samples": samples,
        })),
    };
    Ok(Outcome { body, code })
}

pub fn verify_exit_code(verdict: Verdict) -> i32 {
    match verdict {
        Verdict::ConsistentWithSimplicial => 0,
        Verdict::RankConditionFails => 1,
        Verdict::Inconsistent => 2,
    }
}

pub fn verify_config(config: &RunConfig) -> VerifyConfig {
    VerifyConfig {
        resolution: config.resolution,
        tol_x: config.tol_x,
        max_iter: config.max_iter,
        rank_threshold: config.rank_threshold,
        ..VerifyConfig::default()
    }
}

pub fn run_verify(config: &RunConfig) -> Result<SimplicialityReport, CliError> {
    Ok(build_report(&config.instance()?, &verify_config(config))?)
}

pub fn cmd_verify(config: &RunConfig) -> Result<Outcome, CliError> {
    let report = run_verify(config)?;
    let code = verify_exit_code(report.verdict);
    let body = match config.format.unwrap_or(Format::Json) {
        Format::Json => json_string(&json!({
            "schema_version": SCHEMA_VERSION,
            "problem": config.problem_record(),
            "config": json!({ "run": config, "verify": verify_config(config) }),
            "checks": report.checks,
            "verdict": report.verdict,
        })),
        Format::Csv => {
            let header = ["check", "outcome", "passed", "worst_case", "tolerance"].map(String::from);
            let rows: Vec<Vec<String>> = report
                .checks
                .iter()
                .map(|c| {
                    vec![
                        c.name.clone(),
                        serde_json::to_value(c.outcome)
                            .ok()
                            .and_then(|v| v.as_str().map(String::from))
                            .unwrap_or_default(),
                        c.passed.to_string(),
                        fmt_f64(c.worst_case),
                        fmt_f64(c.tolerance),
                    ]
                })
                .collect();
            csv_string(&header, &rows)?
        }
    };
    Ok(Outcome { body, code })
}

pub fn perturb_exit_code(stats: &GenericityStats) -> i32 {
    if stats.hypothesis_met && stats.failures > 0 {
        1
    } else {
        EXIT_OK
    }
}

pub fn cmd_perturb(args: &PerturbArgs) -> Result<Outcome, CliError> {
    let config = RunConfig::from_args(&args.run)?;
    let problem = config.instance()?;
    if args.zero_rows.contains(&0) {
        return Err(CliError::Usage("--zero-rows are one-based".into()));
    }
    if !(args.scale > 0.0) || !args.scale.is_finite() {
        return Err(CliError::Usage(format!("--scale must be positive, got {}", args.scale)));
    }
    let gen = GenericityConfig {
        zero_rows: args.zero_rows.iter().map(|i| i - 1).collect(),
        trials: args.trials,
        resolution: config.resolution,
        tol_x: config.tol_x,
        max_iter: config.max_iter,
        rank_threshold: config.rank_threshold,
        scale: args.scale,
        seed: config.seed,
        ..GenericityConfig::default()
    };
    let stats = genericity_experiment(&problem, &gen)?;
    let code = perturb_exit_code(&stats);
    let body = match config.format.unwrap_or(Format::Json) {
        Format::Json => json_string(&json!({
            "schema_version": SCHEMA_VERSION,
            "problem": config.problem_record(),
            "config": json!({
                "run": config,
                "zero_rows": args.zero_rows,
                "trials": args.trials,
                "scale": args.scale,
            }),
            "stats": stats,
        })),
        Format::Csv => {
            let header = ["trial", "seed", "outcome", "min_rank", "max_rank", "min_singular_gap"].map(String::from);
            let rows: Vec<Vec<String>> = stats
                .records
                .iter()
                .map(|r| {
                    vec![
                        r.trial.to_string(),
                        r.seed.to_string(),
                        serde_json::to_value(r.outcome)
                            .ok()
                            .and_then(|v| v.as_str().map(String::from))
                            .unwrap_or_default(),
                        r.min_rank.to_string(),
                        r.max_rank.to_string(),
                        fmt_f64(r.min_singular_gap),
                    ]
                })
                .collect();
            csv_string(&header, &rows)?
        }
    };
    Ok(Outcome { body, code })
}

/// A one-parameter path t ↦ w(t) in the weight simplex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightPath {
    /// t·eᵢ + (1 − t)·eⱼ, zero-based indices.
    Edge { from: usize, to: usize },
}

impl WeightPath {
    /// Parses `edge:i,j` (one-based).
    pub fn parse(spec: &str, m: usize) -> Result<Self, CliError> {
        let bad = || CliError::Usage(format!("path `{spec}` is not of the form edge:i,j"));
        let rest = spec.strip_prefix("edge:").ok_or_else(bad)?;
        let (i, j) = rest.split_once(',').ok_or_else(bad)?;
        let i: usize = i.trim().parse().map_err(|_| bad())?;
        let j: usize = j.trim().parse().map_err(|_| bad())?;
        if i == 0 || j == 0 || i > m || j > m || i == j {
            return Err(CliError::Usage(format!(
                "path `{spec}` needs distinct indices in 1..={m}"
            )));
        }
        Ok(Self::Edge { from: i - 1, to: j - 1 })
    }

    pub fn weight(&self, m: usize, t: f64) -> Result<WeightVector, Error> {
        let Self::Edge { from, to } = *self;
        let mut raw = vec![0.0; m];
        raw[from] = t;
        raw[to] = 1.0 - t;
        WeightVector::new(raw)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeResult {
    pub t: f64,
    pub x: Vec<f64>,
    /// (x*(w(t + h)) − x*(w(t))) / h
    pub right: Vec<f64>,
    /// (x*(w(t)) − x*(w(t − h))) / h
    pub left: Vec<f64>,
    pub converged: bool,
}

/// One-sided difference quotients of x* ∘ path at each parameter in `at`.
pub fn difference_quotients(
    problem: &ProblemInstance,
    path: WeightPath,
    at: &[f64],
    h: f64,
    options: &ParetoOptions,
) -> Result<Vec<ProbeResult>, CliError> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(CliError::Usage(format!("step h must be positive, got {h}")));
    }
    let m = problem.m();
    at.iter()
        .map(|&t| {
            if !(t - h >= 0.0 && t + h <= 1.0) {
                return Err(CliError::Usage(format!(
                    "t = {t} with h = {h} leaves the path domain [0, 1]"
                )));
            }
            let solve = |s: f64| -> Result<_, CliError> { Ok(x_star(problem, &path.weight(m, s)?, options)?) };
            let (lo, mid, hi) = (solve(t - h)?, solve(t)?, solve(t + h)?);
            let quotient = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(p, q)| (p - q) / h).collect() };
            Ok(ProbeResult {
                t,
                right: quotient(&hi.x, &mid.x),
                left: quotient(&mid.x, &lo.x),
                converged: lo.converged && mid.converged && hi.converged,
                x: mid.x,
            })
        })
        .collect()
}

pub fn cmd_diff_probe(args: &DiffProbeArgs) -> Result<Outcome, CliError> {
    let config = RunConfig::from_args(&args.run)?;
    let problem = config.instance()?;
    let path = WeightPath::parse(&args.path, problem.m())?;
    let probes = difference_quotients(&problem, path, &args.at, args.h, &config.pareto_options())?;
    let code = if probes.iter().all(|p| p.converged) { EXIT_OK } else { 2 };
    let body = match config.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let n = problem.n();
            let mut header = vec!["t".to_string(), "side".to_string()];
            header.extend((1..=n).map(|i| format!("q_{i}")));
            let mut rows = Vec::new();
            for p in &probes {
                for (side, q) in [("right", &p.right), ("left", &p.left)] {
                    let mut r = vec![fmt_f64(p.t), side.to_string()];
                    r.extend(q.iter().map(|&v| fmt_f64(v)));
                    rows.push(r);
                }
            }
            csv_string(&header, &rows)?
        }
        Format::Json => json_string(&json!({
            "schema_version": SCHEMA_VERSION,
            "problem": config.problem_record(),
            "config": json!({ "run": config, "path": args.path, "h": args.h }),
            "probes": probes,
        })),
    };
    Ok(Outcome { body, code })
}

pub fn cmd_catalog_list(format: Option<Format>) -> Result<Outcome, CliError> {
    let body = match format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let header = ["name", "params", "definition"].map(String::from);
            let rows: Vec<Vec<String>> = catalog::ENTRIES
                .iter()
                .map(|e| {
                    let params: Vec<String> = e.params.iter().map(|(k, d)| format!("{k}: {d}")).collect();
                    vec![e.name.to_string(), params.join("; "), e.summary.to_string()]
                })
                .collect();
            csv_string(&header, &rows)?
        }
        Format::Json => {
            let entries: Vec<_> = catalog::ENTRIES
                .iter()
                .map(|e| {
                    json!({
                        "name": e.name,
                        "params": e.params.iter().map(|(k, d)| json!({"name": k, "description": d})).collect::<Vec<_>>(),
                        "definition": e.summary,
                    })
                })
                .collect();
            json_string(&json!({ "schema_version": SCHEMA_VERSION, "problems": entries }))
        }
    };
    Ok(Outcome { body, code: EXIT_OK })
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory followed by a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let io = |source: std::io::Error| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn dispatch(command: &Command) -> Result<(Outcome, Option<PathBuf>), CliError> {
    match command {
        Command::Pareto(a) => {
            let c = RunConfig::from_args(a)?;
            Ok((cmd_pareto(&c)?, c.output))
        }
        Command::Verify(a) => {
            let c = RunConfig::from_args(a)?;
            Ok((cmd_verify(&c)?, c.output))
        }
        Command::Perturb(a) => Ok((cmd_perturb(a)?, a.run.output.clone())),
        Command::DiffProbe(a) => Ok((cmd_diff_probe(a)?, a.run.output.clone())),
        Command::Catalog {
            action: CatalogAction::List { format, output },
        } => Ok((cmd_catalog_list(*format)?, output.clone())),
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                return EXIT_USAGE;
            }
            let _ = write!(stdout, "{text}");
            return EXIT_OK;
        }
    };
    let result = dispatch(&cli.command).and_then(|(outcome, output)| {
        match output {
            Some(path) => write_atomic(&path, outcome.body.as_bytes())?,
            None => stdout
                .write_all(outcome.body.as_bytes())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })?,
        }
        Ok(outcome.code)
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
