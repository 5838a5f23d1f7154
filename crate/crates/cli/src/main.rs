mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use stein_sense::Error as CoreError;

#[derive(Parser, Debug)]
#[command(name = "stein-sense", version, about = "Single-index compressed sensing under non-Gaussian measurements")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory. Files are written here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Overrides the seed in the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Exit with status 3 when a hypothesis of a bound or of the sample
    /// size fails.
    #[arg(long, global = true)]
    pub strict: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Zero-bias and Stein-coefficient discrepancies of a sensing law.
    Discrepancy {
        /// A built-in law; used when no --config is given.
        #[arg(long)]
        dist: Option<String>,
    },
    /// Discrepancies of an ε-contaminated Gaussian.
    Contaminate,
    /// Population quantities λ, v_x and α with the closed-form α bounds.
    Alpha,
    /// Generates (or loads) a dataset and runs the estimator.
    Recover {
        /// Binary dataset to use instead of drawing a fresh one.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Gaussian mean width of a set.
    Width,
    /// Runs an experiment sweep.
    Sweep,
    /// Bound comparison and rate fit for an existing trials CSV.
    Report {
        /// A trials CSV, or a directory containing trials.csv.
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Precondition(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Precondition(_) => 3,
            Failure::Runtime(_) => 1,
        }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidSpec(_) | CoreError::Degenerate(_) | CoreError::Json(_) | CoreError::DimensionMismatch { .. } => {
                Failure::Config(e.to_string())
            }
            CoreError::Precondition(_) => Failure::Precondition(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (label, msg) = match &f {
                Failure::Config(m) => ("config error", m),
                Failure::Precondition(m) => ("precondition failed", m),
                Failure::Runtime(m) => ("error", m),
            };
            eprintln!("stein-sense: {label}: {msg}");
            ExitCode::from(f.code())
        }
    }
}
