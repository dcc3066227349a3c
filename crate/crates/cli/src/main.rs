//! `lasso-geo`: trace, evaluate and verify exact lasso paths.

mod logger;
mod table;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lasso_geo::formats::{chain_report_json, num, path_to_json, spec_from_json, spec_to_json};
use lasso_geo::geometry::{analyze_chain, assert_dimension_bounds, chain_checks, BoundCheck};
use lasso_geo::oracle::{solve_ista, solve_kkt_enum};
use lasso_geo::random::mixed_trial;
use lasso_geo::{covmodel, trace_path, Divisor, LassoPath, ProblemSpec, Query};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::value::RawValue;

type Num = Box<RawValue>;

const CHAIN_TOL: f64 = 1e-9;
const ORACLE_TOL: f64 = 1e-6;
const ISTA_TOL: f64 = 1e-11;
const ISTA_MAX_ITER: usize = 5_000_000;

#[derive(Debug)]
pub enum CliError {
    /// Input was read but is not a valid problem or query.
    Validation(String),
    /// Reading, writing or parsing failed.
    Io(String),
}

impl CliError {
    fn io(e: impl std::fmt::Display) -> Self {
        CliError::Io(e.to_string())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

impl From<lasso_geo::Error> for CliError {
    fn from(e: lasso_geo::Error) -> Self {
        match e {
            lasso_geo::Error::Parse(msg) => CliError::Io(msg),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "lasso-geo", version, about = "Exact lasso solution paths")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trace the full path and write it as JSON, or as a CSV grid over λ.
    Trace {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Number of log-spaced λ values in the CSV grid.
        #[arg(long, default_value_t = 100)]
        grid: usize,
        #[arg(long, default_value_t = 1.0)]
        lambda_scale: f64,
    },
    /// Evaluate the path at one value of s, t or λ.
    Eval {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[command(flatten)]
        query: QueryArgs,
        #[arg(long, default_value_t = 1.0)]
        lambda_scale: f64,
    },
    /// Check the chain geometry and dimension bounds of one or many paths.
    Verify {
        #[command(flatten)]
        input: OptionalInputArgs,
        #[command(flatten)]
        random: RandomArgs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compare the path with the enumeration and ISTA reference solvers.
    OracleCheck {
        #[command(flatten)]
        input: OptionalInputArgs,
        #[command(flatten)]
        random: RandomArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Number of log-spaced λ values per problem.
        #[arg(long, default_value_t = 20)]
        grid: usize,
    },
    /// Convert a CSV dataset into a moments file.
    Ingest {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Build a CSV dataset whose covariance equals a unit-diagonal moments file.
    Synth {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum InputKind {
    Csv,
    MomentsJson,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum DivisorArg {
    #[value(name = "n")]
    N,
    #[value(name = "n-1")]
    NMinus1,
}

#[derive(Args)]
struct InputArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    options: InputOptions,
}

#[derive(Args)]
struct OptionalInputArgs {
    /// Problem file; without it, random problems are generated.
    #[arg(long)]
    input: Option<PathBuf>,
    #[command(flatten)]
    options: InputOptions,
}

#[derive(Args)]
struct InputOptions {
    /// Input format; inferred from the file extension when omitted.
    #[arg(long)]
    kind: Option<InputKind>,
    /// Response column of a CSV input.
    #[arg(long)]
    response: Option<String>,
    /// Scale predictors to unit variance.
    #[arg(long)]
    standardize: bool,
    #[arg(long, value_enum, default_value = "n-1")]
    divisor: DivisorArg,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: OutputFormat,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct QueryArgs {
    #[arg(long, allow_hyphen_values = true)]
    at_s: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    at_t: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    at_lambda: Option<f64>,
}

#[derive(Args)]
struct RandomArgs {
    #[arg(long, default_value_t = 200)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Fixed dimension of random problems (default: uniform on 2..=8).
    #[arg(long)]
    p: Option<usize>,
}

fn main() -> ExitCode {
    logger::init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let msg = match &e {
                CliError::Validation(m) | CliError::Io(m) => m.clone(),
            };
            log::error!("{msg}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Runs a command; `Ok(false)` means the command ran but a check failed.
fn run(command: Command) -> Result<bool, CliError> {
    match command {
        Command::Trace {
            input,
            output,
            grid,
            lambda_scale,
        } => {
            let path = trace_path(&load(&input.input, &input.options)?)?;
            log::info!("traced {} events", path.events().len());
            match output.format {
                OutputFormat::Json => write_text(output.output.as_deref(), &path_to_json(&path))?,
                OutputFormat::Csv => {
                    let rows = grid_rows(&path, grid, lambda_scale)?;
                    table::write_rows(
                        sink(output.output.as_deref())?,
                        &table::point_header(path.p()),
                        &rows,
                    )?;
                }
            }
            Ok(true)
        }
        Command::Eval {
            input,
            output,
            query,
            lambda_scale,
        } => {
            let path = trace_path(&load(&input.input, &input.options)?)?;
            let q = match (query.at_s, query.at_t, query.at_lambda) {
                (Some(s), _, _) => Query::AtS(s),
                (_, Some(t), _) => Query::AtT(t),
                (_, _, Some(lambda)) => Query::AtLambda {
                    lambda,
                    lambda_scale,
                },
                _ => unreachable!("clap requires one query"),
            };
            let point = path.point(q)?;
            match output.format {
                OutputFormat::Json => {
                    let v = EvalOut {
                        s: num(point.s),
                        lambda: num(0.0 - point.s / lambda_scale),
                        t: num(point.t),
                        beta: point.beta.iter().map(|&x| num(x)).collect(),
                    };
                    write_json(output.output.as_deref(), &v)?;
                }
                OutputFormat::Csv => {
                    let rows = [table::point_row(&point, lambda_scale)];
                    table::write_rows(
                        sink(output.output.as_deref())?,
                        &table::point_header(path.p()),
                        &rows,
                    )?;
                }
            }
            Ok(true)
        }
        Command::Verify {
            input,
            random,
            output,
        } => verify(input, random, output.as_deref()),
        Command::OracleCheck {
            input,
            random,
            output,
            grid,
        } => oracle_check(input, random, output, grid),
        Command::Ingest { input, output } => {
            let spec = load(&input.input, &input.options)?;
            write_text(output.as_deref(), &spec_to_json(&spec))?;
            Ok(true)
        }
        Command::Synth { input, output } => {
            let spec = spec_from_json(&std::fs::read_to_string(&input)?)?;
            let data = covmodel::synthesize_dataset(spec.k1())?;
            let names: Vec<String> = match spec.names() {
                Some(names) => names.to_vec(),
                None => (1..=spec.p()).map(|j| format!("x{j}")).collect(),
            };
            table::write_dataset(sink(output.as_deref())?, &data, &names)?;
            Ok(true)
        }
    }
}

fn load(path: &Path, options: &InputOptions) -> Result<ProblemSpec, CliError> {
    let kind = options.kind.unwrap_or_else(|| {
        if path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"))
        {
            InputKind::MomentsJson
        } else {
            InputKind::Csv
        }
    });
    log::debug!("loading {}", path.display());
    match kind {
        InputKind::MomentsJson => Ok(spec_from_json(&std::fs::read_to_string(path)?)?),
        InputKind::Csv => {
            let file = File::open(path)?;
            let t = table::read_table(BufReader::new(file))?;
            let divisor = match options.divisor {
                DivisorArg::N => Divisor::N,
                DivisorArg::NMinus1 => Divisor::NMinusOne,
            };
            let (data, names) = table::dataset(&t, options.response.as_deref(), divisor)?;
            Ok(ProblemSpec::from_data(&data, options.standardize)?.with_names(names)?)
        }
    }
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_text(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    let mut out = sink(path)?;
    writeln!(out, "{text}")?;
    out.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    write_text(
        path,
        &serde_json::to_string_pretty(value).map_err(CliError::io)?,
    )
}

#[derive(Serialize)]
struct EvalOut {
    s: Num,
    lambda: Num,
    t: Num,
    beta: Vec<Num>,
}

/// `n` values log-spaced from `hi` down to `hi · 1e-4`.
fn lambda_grid(hi: f64, n: usize) -> Vec<f64> {
    let lo = hi * 1e-4;
    (0..n)
        .map(|i| {
            let f = if n <= 1 {
                0.0
            } else {
                i as f64 / (n - 1) as f64
            };
            (hi.ln() + f * (lo.ln() - hi.ln())).exp()
        })
        .collect()
}

fn grid_rows(path: &LassoPath, n: usize, lambda_scale: f64) -> Result<Vec<Vec<String>>, CliError> {
    if lambda_scale.is_nan() || lambda_scale <= 0.0 {
        return Err(CliError::Validation(format!(
            "lambda scale must be positive, got {lambda_scale}"
        )));
    }
    let lambda_max = path.spec().b().amax() / lambda_scale;
    if lambda_max == 0.0 {
        return Ok(Vec::new());
    }
    lambda_grid(lambda_max, n)
        .into_iter()
        .map(|lambda| {
            let point = path.point(Query::AtLambda {
                lambda,
                lambda_scale,
            })?;
            Ok(table::point_row(&point, lambda_scale))
        })
        .collect()
}

/// Problems named by the input file, or a seeded random batch.
fn problems(
    input: &OptionalInputArgs,
    random: &RandomArgs,
) -> Result<Vec<(String, ProblemSpec)>, CliError> {
    if let Some(path) = &input.input {
        return Ok(vec![(
            path.display().to_string(),
            load(path, &input.options)?,
        )]);
    }
    if let Some(p) = random.p {
        if p == 0 {
            return Err(CliError::Validation("p must be positive".into()));
        }
    }
    let range = random.p.map_or(2..=8, |p| p..=p);
    Ok((0..random.trials)
        .into_par_iter()
        .map(|trial| {
            (
                format!("trial {trial}"),
                mixed_trial(random.seed, trial, range.clone()),
            )
        })
        .collect())
}

#[derive(Serialize)]
struct VerifyEntry {
    problem: String,
    p: usize,
    report: serde_json::Value,
    checks: Vec<BoundCheck>,
}

fn verify(
    input: OptionalInputArgs,
    random: RandomArgs,
    output: Option<&Path>,
) -> Result<bool, CliError> {
    let problems = problems(&input, &random)?;
    let entries: Vec<Result<VerifyEntry, CliError>> = problems
        .into_par_iter()
        .map(|(name, spec)| {
            let path = trace_path(&spec)?;
            let report = analyze_chain(&path, CHAIN_TOL);
            let mut checks = chain_checks(&report);
            checks.extend(assert_dimension_bounds(&report, &spec));
            Ok(VerifyEntry {
                problem: name,
                p: spec.p(),
                report: chain_report_json(&report),
                checks,
            })
        })
        .collect();
    let entries = entries.into_iter().collect::<Result<Vec<_>, _>>()?;
    let failed: usize = entries
        .iter()
        .map(|e| e.checks.iter().filter(|c| !c.passed).count())
        .sum();
    for e in &entries {
        for c in e.checks.iter().filter(|c| !c.passed) {
            log::info!("{}: {} failed ({})", e.problem, c.name, c.detail);
        }
    }
    write_json(
        output,
        &VerifyOut {
            problems: entries,
            failed_checks: failed,
            passed: failed == 0,
        },
    )?;
    Ok(failed == 0)
}

#[derive(Serialize)]
struct VerifyOut {
    problems: Vec<VerifyEntry>,
    failed_checks: usize,
    passed: bool,
}

struct OracleRow {
    problem: String,
    p: usize,
    path_vs_kkt: f64,
    path_vs_ista: f64,
    kkt_vs_ista: f64,
}

#[derive(Serialize)]
struct OracleRowOut<'a> {
    problem: &'a str,
    p: usize,
    path_vs_kkt: Num,
    path_vs_ista: Num,
    kkt_vs_ista: Num,
}

#[derive(Serialize)]
struct OracleOut<'a> {
    rows: Vec<OracleRowOut<'a>>,
    max_path_vs_kkt: Num,
    max_discrepancy: Num,
    tolerance: Num,
    passed: bool,
}

fn oracle_row(name: String, spec: &ProblemSpec, grid: usize) -> Result<OracleRow, CliError> {
    let path = trace_path(spec)?;
    let mut row = OracleRow {
        problem: name,
        p: spec.p(),
        path_vs_kkt: 0.0,
        path_vs_ista: 0.0,
        kkt_vs_ista: 0.0,
    };
    let lambda_max = spec.b().amax();
    if lambda_max == 0.0 {
        return Ok(row);
    }
    for lambda in lambda_grid(lambda_max, grid) {
        let traced = path.evaluate(Query::AtLambda {
            lambda,
            lambda_scale: 1.0,
        })?;
        let kkt = solve_kkt_enum(spec, lambda)?.beta;
        let ista = solve_ista(spec, lambda, ISTA_TOL, ISTA_MAX_ITER)?.beta;
        row.path_vs_kkt = row.path_vs_kkt.max((&traced - &kkt).amax());
        row.path_vs_ista = row.path_vs_ista.max((&traced - &ista).amax());
        row.kkt_vs_ista = row.kkt_vs_ista.max((&kkt - &ista).amax());
    }
    Ok(row)
}

fn oracle_check(
    input: OptionalInputArgs,
    random: RandomArgs,
    output: OutputArgs,
    grid: usize,
) -> Result<bool, CliError> {
    let problems = problems(&input, &random)?;
    let rows: Vec<Result<OracleRow, CliError>> = problems
        .into_par_iter()
        .map(|(name, spec)| oracle_row(name, &spec, grid))
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    let max = rows
        .iter()
        .map(|r| r.path_vs_kkt.max(r.path_vs_ista).max(r.kkt_vs_ista))
        .fold(0.0, f64::max);
    let max_kkt = rows.iter().map(|r| r.path_vs_kkt).fold(0.0, f64::max);
    log::info!("max discrepancy {max:e}");
    match output.format {
        OutputFormat::Json => {
            let v = OracleOut {
                rows: rows
                    .iter()
                    .map(|r| OracleRowOut {
                        problem: &r.problem,
                        p: r.p,
                        path_vs_kkt: num(r.path_vs_kkt),
                        path_vs_ista: num(r.path_vs_ista),
                        kkt_vs_ista: num(r.kkt_vs_ista),
                    })
                    .collect(),
                max_path_vs_kkt: num(max_kkt),
                max_discrepancy: num(max),
                tolerance: num(ORACLE_TOL),
                passed: max <= ORACLE_TOL,
            };
            write_json(output.output.as_deref(), &v)?;
        }
        OutputFormat::Csv => {
            let header: Vec<String> =
                ["problem", "p", "path_vs_kkt", "path_vs_ista", "kkt_vs_ista"]
                    .map(String::from)
                    .to_vec();
            let fmt = lasso_geo::formats::csv_num;
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.problem.clone(),
                        r.p.to_string(),
                        fmt(r.path_vs_kkt),
                        fmt(r.path_vs_ista),
                        fmt(r.kkt_vs_ista),
                    ]
                })
                .collect();
            table::write_rows(sink(output.output.as_deref())?, &header, &body)?;
        }
    }
    Ok(max <= ORACLE_TOL)
}
