use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use fpseg::bench::{format_trace_summary, summarize_trace_files, write_report};
use fpseg::io::{read_signal, write_signal, write_trace, Column, SignalFormat};
use fpseg::segment::classical_cap_from_env;
use fpseg::{
    run_bench, segment, Algorithm, BenchConfig, LossKind, NoiseKind, SegmentOptions, Shape,
    SignalSpec,
};
use serde_json::json;

/// Exact multiple change-point segmentation.
///
/// Change-points are reported as the 1-based index of the last observation
/// of every segment except the final one.
#[derive(Parser, Debug)]
#[command(name = "fpseg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Segment a signal into 1..=k-max segments and print the result as JSON.
    Segment(SegmentArgs),
    /// Write a simulated signal and a JSON sidecar describing it.
    Simulate(SimulateArgs),
    /// Run a benchmark described by a config file.
    Bench(BenchArgs),
    /// Per-step maxima over several trace CSVs.
    TraceSummary(TraceSummaryArgs),
}

#[derive(Args, Debug)]
struct SegmentArgs {
    /// Signal file.
    #[arg(long, short)]
    input: PathBuf,
    /// `floats`, `csv` or `csv:<column>`.
    #[arg(long, default_value = "floats")]
    format: SignalFormat,
    /// CSV column (0-based index or header name); implies `--format csv`.
    #[arg(long)]
    column: Option<Column>,
    #[arg(long, short)]
    k_max: usize,
    #[arg(long, default_value_t = LossKind::Quadratic)]
    loss: LossKind,
    /// `pruned`, `classical` or `grid`.
    #[arg(long, default_value = "pruned")]
    algorithm: Algorithm,
    /// Number of grid values (grid algorithm only).
    #[arg(long)]
    grid_size: Option<usize>,
    /// Write the per-step trace CSV here (pruned algorithm only).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the JSON here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Read the whole spec from a JSON file (for example an earlier sidecar).
    #[arg(long, conflicts_with_all = ["shape", "n", "amplitude", "frequency", "level", "noise", "seed"])]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = Shape::Constant)]
    shape: Shape,
    #[arg(long, short, required_unless_present = "spec")]
    n: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    amplitude: f64,
    /// Periods over the whole signal.
    #[arg(long, default_value_t = 1.0)]
    frequency: f64,
    #[arg(long, default_value_t = 0.0)]
    level: f64,
    #[arg(long, default_value_t = NoiseKind::Gaussian)]
    noise: NoiseKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Signal file; the spec is written next to it with a `.spec.json` extension.
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, short)]
    config: PathBuf,
    /// Overrides the config's `report` path.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Overrides the config's `threads` (0 lets the pool decide).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct TraceSummaryArgs {
    #[arg(required = true)]
    traces: Vec<PathBuf>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn emit(output: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

fn run_segment(args: SegmentArgs) -> anyhow::Result<()> {
    let format = match (args.column, args.format) {
        (Some(column), SignalFormat::Floats | SignalFormat::Csv(Column::Index(0))) => {
            SignalFormat::Csv(column)
        }
        (Some(_), SignalFormat::Csv(_)) => {
            bail!(fpseg::Error::Config(
                "conflicting flags: --column given twice".into()
            ))
        }
        (None, format) => format,
    };
    let algorithm = match (args.algorithm, args.grid_size) {
        (Algorithm::Grid { .. }, Some(points)) => Algorithm::Grid { points },
        (_, Some(_)) => bail!(fpseg::Error::Config(
            "conflicting flags: --grid-size requires --algorithm grid".into()
        )),
        (a, None) => a,
    };
    let options = SegmentOptions {
        loss: args.loss,
        k_max: args.k_max,
        algorithm,
        classical_cap: classical_cap_from_env()?,
        trace: args.trace.is_some(),
    };
    let signal = read_signal(&args.input, &format)?;
    let (out, rows) = segment(&signal, &options)?;
    if let (Some(path), Some(rows)) = (&args.trace, rows) {
        write_trace(path, rows)?;
    }
    let mut text = serde_json::to_string_pretty(&out)?;
    text.push('\n');
    emit(args.output.as_deref(), &text)
}

fn run_simulate(args: SimulateArgs) -> anyhow::Result<()> {
    let spec = match &args.spec {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text)
                .map_err(|e| fpseg::Error::InvalidSpec(format!("{}: {e}", path.display())))?
        }
        None => SignalSpec {
            shape: args.shape,
            n: args.n.expect("required by clap"),
            amplitude: args.amplitude,
            frequency: args.frequency,
            level: args.level,
            noise: args.noise,
            seed: args.seed,
        },
    };
    let signal = fpseg::simulate(&spec)?;
    write_signal(&args.output, &signal)?;
    let sidecar = args.output.with_extension("spec.json");
    fs::write(&sidecar, serde_json::to_string_pretty(&spec)? + "\n")
        .with_context(|| format!("writing {}", sidecar.display()))?;
    Ok(())
}

fn run_bench_command(args: BenchArgs) -> anyhow::Result<()> {
    let mut config = BenchConfig::load(&args.config)?;
    if let Some(report) = args.report {
        config.report = Some(report);
    }
    if let Some(threads) = args.threads {
        config.threads = threads;
    }
    let report = run_bench(&config)?;
    for problem in report.agreement_violations(1e-8) {
        eprintln!("warning: {problem}");
    }
    let violations = report.total_bound_violations();
    if violations > 0 {
        eprintln!("warning: {violations} steps exceeded the interval bound");
    }
    match &config.report {
        Some(path) => {
            let summary = write_report(&report, path)?;
            eprintln!("report: {}\nsummary: {}", path.display(), summary.display());
            emit(None, &report.summary_csv())
        }
        None => emit(None, &report.to_csv()),
    }
}

fn run_trace_summary(args: TraceSummaryArgs) -> anyhow::Result<()> {
    let rows = summarize_trace_files(&args.traces)?;
    emit(args.output.as_deref(), &format_trace_summary(&rows))
}

fn error_json(kind: &str, message: &str) -> String {
    json!({ "error": { "kind": kind, "message": message } }).to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let message = text
                .lines()
                .take_while(|l| !l.starts_with("Usage:"))
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with("For more information"))
                .collect::<Vec<_>>()
                .join(" ");
            eprintln!(
                "{}",
                error_json("usage", message.trim_start_matches("error: "))
            );
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Segment(args) => run_segment(args),
        Command::Simulate(args) => run_simulate(args),
        Command::Bench(args) => run_bench_command(args),
        Command::TraceSummary(args) => run_trace_summary(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = e
                .downcast_ref::<fpseg::Error>()
                .map_or("runtime", fpseg::Error::kind);
            eprintln!("{}", error_json(kind, &format!("{e:#}")));
            ExitCode::FAILURE
        }
    }
}
