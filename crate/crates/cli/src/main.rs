//! `specker-kit`: batch analysis of Specker-scenario statistics with JSON reports.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use report::{Failure, Report};

#[derive(Parser, Debug)]
#[command(
    name = "specker-kit",
    version,
    about = "Exact analysis of three-measurement contextuality scenarios",
    after_help = SCHEMA_HELP
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

const SCHEMA_HELP: &str = "\
Input and report formats are JSON Schemas (draft 2020-12) in the schemas/ directory:
  inputs:  input-correlation ({\"pairs\"} or {\"six\"}), input-scenario, input-model, input-directions
  reports: <subcommand>.schema.json, error.schema.json
Rationals are strings \"p/q\" (decimal strings and JSON numbers are snapped, denominator <= 10^6).
Exit codes: 0 ok, 1 internal error, 2 invalid input or usage, 3 infeasible.";

#[derive(Args, Debug)]
struct InputArg {
    /// JSON file with `{"pairs": {...}}` or `{"six": {...}}`; `-` reads stdin.
    #[arg(long, short)]
    input: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate statistics and evaluate the KS and noncontextuality inequalities.
    Check {
        #[command(flatten)]
        input: InputArg,
        /// Predictabilities for the noncontextuality bounds (rationals, comma separated).
        #[arg(long, value_delimiter = ',')]
        eta0: Vec<String>,
    },
    /// List the twelve vertices of the no-disturbance polytope.
    Vertices,
    /// Convex decomposition over the vertices and extremality.
    Decompose {
        #[command(flatten)]
        input: InputArg,
    },
    /// Joint-distribution search (with a certificate when none exists).
    Fine {
        /// Specker statistics, or `{"measurements", "contexts", "stats"}`.
        #[arg(long, short)]
        input: PathBuf,
    },
    /// Maximum of the inequality forms over ontic states with unsharp responses.
    Ontmax {
        /// Common sharpness of the three response functions.
        #[arg(long)]
        eta: Option<String>,
        /// R0, R1, R2, R3 or all.
        #[arg(long, default_value = "all")]
        inequality: String,
        /// Research mode: three per-measurement sharpnesses, comma separated.
        #[arg(long, value_delimiter = ',', num_args = 1)]
        mixed: Option<Vec<String>>,
        /// Also evaluate an ontological model file.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Swap the outcomes of one measurement.
    Relabel {
        #[command(flatten)]
        input: InputArg,
        /// M1, M2 or M3.
        #[arg(long)]
        measurement: String,
    },
    /// Scan sharpness for three unsharp qubit measurements.
    QuantumScan {
        /// `trine` or a JSON file with three Bloch directions.
        #[arg(long, default_value = "trine")]
        directions: String,
        /// `start:stop:step`.
        #[arg(long, default_value = "0:1:0.05")]
        eta_grid: String,
        /// `mixed` (maximally mixed), `optimize` (search pure states) or `bloch:x,y,z`.
        #[arg(long, default_value = "mixed")]
        state: String,
        /// Fibonacci grid size used by `--state optimize`.
        #[arg(long, default_value_t = 48)]
        grid: usize,
        /// Emit CSV instead of a JSON report.
        #[arg(long)]
        csv: bool,
    },
    /// Seeded random points of the no-disturbance polytope (ChaCha8).
    Sample {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
}

fn init_logging() {
    let level = match std::env::var("SPECKER_KIT_LOG").as_deref() {
        Ok("debug") => log::LevelFilter::Debug,
        Ok("info") => log::LevelFilter::Info,
        _ => log::LevelFilter::Off,
    };
    env_logger::Builder::new().filter_level(level).target(env_logger::Target::Stderr).init();
}

fn run(cli: Cli) -> Result<Report, Failure> {
    match cli.command {
        Command::Check { input, eta0 } => commands::check(&input.input, &eta0),
        Command::Vertices => commands::vertices(),
        Command::Decompose { input } => commands::decompose(&input.input),
        Command::Fine { input } => commands::fine(&input),
        Command::Ontmax { eta, inequality, mixed, model } => {
            commands::ontmax(eta.as_deref(), &inequality, mixed.as_deref(), model.as_deref())
        }
        Command::Relabel { input, measurement } => commands::relabel(&input.input, &measurement),
        Command::QuantumScan { directions, eta_grid, state, grid, csv } => {
            commands::quantum_scan(&directions, &eta_grid, &state, grid, csv)
        }
        Command::Sample { seed, count } => commands::sample(seed, count),
    }
}

fn main() -> ExitCode {
    init_logging();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            if !e.use_stderr() {
                return ExitCode::SUCCESS;
            }
            eprintln!("\n{SCHEMA_HELP}");
            return ExitCode::from(2);
        }
    };
    let command = report::command_name(&cli.command);
    match run(cli) {
        Ok(report) => report.emit(),
        Err(failure) => failure.emit(command),
    }
}
