//! `binq`: simulate, analyze and reproduce the binomial-n study.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use binq_core::analysis::ReportFormat;

#[derive(Parser)]
#[command(name = "binq", version, about = "Bayesian estimation of the binomial n: simulation study driver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (scenario, k, replication) cell of a config and write records and MSE curves.
    Simulate(SimulateArgs),
    /// Fit log-log slopes to MSE curves and write report files.
    Analyze(AnalyzeArgs),
    /// Fit slopes per α and locate the zero α* of β(α).
    Sweep(AnalyzeArgs),
    /// Run the bundled config of a figure and write its data files.
    Reproduce(ReproduceArgs),
    /// Check class membership and the prior tail bound over a config's grid.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    parallelism: Option<usize>,
    /// Replace the seed of every scenario.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    run: RunArgs,
    /// Store per-cell wall time in the records.
    #[arg(long)]
    timing: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Gnuplot,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => ReportFormat::Csv,
            Format::Gnuplot => ReportFormat::Gnuplot,
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    /// `curves.csv`, or a directory holding one.
    #[arg(long)]
    input: PathBuf,
    /// Config supplying scenarios and the analysis section.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for report files (default: next to the input).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Lower end of the fit window.
    #[arg(long)]
    kmin: Option<f64>,
    /// Upper end of the fit window.
    #[arg(long)]
    kmax: Option<f64>,
    /// MSE level marking the phase transition.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Base name of the report files.
    #[arg(long)]
    name: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Desk,
    Full,
}

#[derive(Args)]
struct ReproduceArgs {
    /// fig1a, fig1b, fig1c, fig2, fig3a, fig3b or fig3c.
    figure: String,
    #[arg(long, value_enum, default_value = "desk")]
    scale: ScaleArg,
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Class constant λ > 1.
    #[arg(long)]
    lambda: Option<f64>,
    /// α of the tail bound Π(m) >= β exp(-α m²).
    #[arg(long)]
    tail_alpha: Option<f64>,
    /// β of the tail bound.
    #[arg(long)]
    tail_beta: Option<f64>,
    /// Largest m scanned for the tail bound.
    #[arg(long)]
    m_max: Option<u64>,
}

/// A failure and its exit code.
pub enum Failure {
    /// Bad invocation, config or input: exit 2.
    Usage(String),
    /// The run itself failed: exit 3.
    Runtime(String),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("BINQ_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Analyze(a) => commands::analyze(a, false),
        Command::Sweep(a) => commands::analyze(a, true),
        Command::Reproduce(a) => commands::reproduce(a),
        Command::Validate(a) => commands::validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
