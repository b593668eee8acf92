//! `detperm`: estimate, compute and inspect matrix permanents from the shell.
//!
//! Exit codes: 0 success, 1 I/O or self-test failure, 2 parse or usage
//! error, 3 domain error, 4 oracle size limit exceeded.

mod selftest;

use std::collections::hash_map::RandomState;
use std::fs;
use std::hash::BuildHasher;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use detperm::estimators::{estimate_permanent, Aggregation, EstimatorConfig, EstimatorKind};
use detperm::experiments::{run_experiment, ExperimentSpec};
use detperm::permanent::{permanent_naive, permanent_ryser};
use detperm::report::render;
use detperm::spectrum::{default_epsilon, spectrum_split};
use detperm::{DenseMatrix, Error, SeededSource, DEFAULT_SEED};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "detperm", version, about = "Determinant-based permanent estimators")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate per(M) with repeated det(A)^2 draws.
    Estimate(EstimateArgs),
    /// Exact permanent by Ryser's formula or permutation expansion.
    Exact(ExactArgs),
    /// Singular values and the truncated/small determinant split.
    Spectrum(SpectrumArgs),
    /// Run an experiment described by a JSON spec file.
    Experiment(ExperimentArgs),
    /// Run the exhaustive oracle checks.
    Selftest,
}

#[derive(Args)]
struct IoArgs {
    /// Matrix file: `.json` for {"rows","cols","entries"}, anything else CSV.
    #[arg(long)]
    input: PathBuf,

    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Gg,
    Barvinok,
}

#[derive(Clone, Copy, ValueEnum)]
enum AggregationArg {
    Mean,
    Median,
    Single,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Ryser,
    Naive,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    io: IoArgs,

    #[arg(long, value_enum, default_value = "gg")]
    kind: KindArg,

    #[arg(long, default_value_t = 1000)]
    trials: usize,

    #[arg(long, value_enum, default_value = "mean")]
    aggregation: AggregationArg,

    /// An unsigned integer, or `random`.
    #[arg(long, default_value_t = DEFAULT_SEED.to_string())]
    seed: String,

    /// Include per-trial log values.
    #[arg(long)]
    verbose: bool,
}

#[derive(Args)]
struct ExactArgs {
    #[command(flatten)]
    io: IoArgs,

    #[arg(long, value_enum, default_value = "ryser")]
    method: MethodArg,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    io: IoArgs,

    /// A positive number, or `paper` for n^(1/6).
    #[arg(long, default_value = "paper")]
    epsilon: String,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment spec (JSON).
    #[arg(long)]
    input: PathBuf,

    /// Output directory; overrides the spec's `outputs`.
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Failures carrying their exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::Parse { .. } | Error::Config(_) => 2,
            Error::Domain(_) | Error::Degenerate(_) => 3,
            Error::Size { .. } => 4,
            Error::Io(_) => 1,
        };
        Failure {
            code,
            message: err.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(err: std::io::Error) -> Self {
        Error::from(err).into()
    }
}

fn usage(message: String) -> Failure {
    Failure { code: 2, message }
}

fn read_matrix(path: &Path) -> Result<DenseMatrix, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::from(Error::Io(format!("{}: {e}", path.display()))))?;
    let parsed = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        DenseMatrix::from_json(&text)
    } else {
        DenseMatrix::from_csv(&text)
    };
    parsed.map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })
}

fn parse_seed(text: &str) -> Result<u64, Failure> {
    if text == "random" {
        return Ok(RandomState::new().hash_one(std::time::SystemTime::now()));
    }
    text.parse().map_err(|_| {
        usage(format!(
            "--seed expects an unsigned integer or `random`, got {text:?}"
        ))
    })
}

/// The command line minus `--threads`, which never affects output.
fn recorded_command_line() -> Vec<String> {
    let mut out = Vec::new();
    let mut args = std::env::args().skip(1);
    while let Some(arg) = args.next() {
        if arg == "--threads" {
            args.next();
        } else if !arg.starts_with("--threads=") {
            out.push(arg);
        }
    }
    out
}

fn provenance(seed: Option<u64>) -> Value {
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command_line": recorded_command_line(),
        "seed": seed,
    })
}

fn emit(report: &Value, output: Option<&Path>) -> Result<(), Failure> {
    let text = render(report);
    match output {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn estimate(args: &EstimateArgs) -> Result<(), Failure> {
    let m = read_matrix(&args.io.input)?;
    let seed = parse_seed(&args.seed)?;
    let kind = match args.kind {
        KindArg::Gg => EstimatorKind::GodsilGutman,
        KindArg::Barvinok => EstimatorKind::Barvinok,
    };
    let aggregation = match args.aggregation {
        AggregationArg::Mean => Aggregation::Mean,
        AggregationArg::Median => Aggregation::Median,
        AggregationArg::Single => Aggregation::Single,
    };
    let cfg = EstimatorConfig::new(kind, args.trials, aggregation, SeededSource::new(seed, 0));
    let report = estimate_permanent(&m, &cfg)?;
    let mut v = report.to_json(args.verbose);
    v["provenance"] = provenance(Some(seed));
    emit(&v, args.io.output.as_deref())
}

fn exact(args: &ExactArgs) -> Result<(), Failure> {
    let m = read_matrix(&args.io.input)?;
    let (method, value) = match args.method {
        MethodArg::Ryser => ("ryser", permanent_ryser(&m)?),
        MethodArg::Naive => ("naive", permanent_naive(&m)?),
    };
    let log = value.value.log_abs();
    let v = json!({
        "method": method,
        "n": m.rows(),
        "exact_sign": value.value.sign(),
        "exact_log": if log.is_finite() { json!(log) } else { Value::Null },
        "exact_small": value.exact_small,
        "provenance": provenance(None),
    });
    emit(&v, args.io.output.as_deref())
}

fn spectrum(args: &SpectrumArgs) -> Result<(), Failure> {
    let m = read_matrix(&args.io.input)?;
    let epsilon = if args.epsilon == "paper" {
        default_epsilon(m.rows())
    } else {
        args.epsilon.parse().map_err(|_| {
            usage(format!(
                "--epsilon expects a number or `paper`, got {:?}",
                args.epsilon
            ))
        })?
    };
    let summary = spectrum_split(&m, epsilon)?;
    let mut v = summary.to_json();
    v["provenance"] = provenance(None);
    emit(&v, args.io.output.as_deref())
}

fn experiment(args: &ExperimentArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.input)
        .map_err(|e| Failure::from(Error::Io(format!("{}: {e}", args.input.display()))))?;
    let spec = ExperimentSpec::from_json(&text)?;
    let out = run_experiment(&spec)?;
    let mut report = out.report;
    report["provenance"] = provenance(Some(spec.seed.seed));
    match args.output.as_ref().or(spec.outputs.as_ref()) {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            emit(&report, Some(&dir.join(format!("{}.json", spec.name))))?;
            if let Some(csv) = out.csv {
                fs::write(dir.join(format!("{}.csv", spec.name)), csv)?;
            }
        }
        None => emit(&report, None)?,
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| usage(e.to_string()))?;
    }
    match &cli.command {
        Command::Estimate(a) => estimate(a),
        Command::Exact(a) => exact(a),
        Command::Spectrum(a) => spectrum(a),
        Command::Experiment(a) => experiment(a),
        Command::Selftest => {
            if selftest::run_all() {
                Ok(())
            } else {
                Err(Failure {
                    code: 1,
                    message: "self-test failed".into(),
                })
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("detperm: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
