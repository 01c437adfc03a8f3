//! `lambda-control`: CLI driver for the Lambda-system optimal control
//! solver.
//!
//! Subcommands: `zero-occupancy`, `bounds`, `sweep`, `integrate`,
//! `reproduce-paper`.  Reports go to stdout as JSON; CSV artifacts land in
//! the output directory.  Exit codes: 0 success, 2 validation error,
//! 3 verification/convergence failure.

mod commands;
mod config;

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lambda_control::bounds::BoundsError;
use lambda_control::dynamics::{DynamicsError, ExtremalSeed};
use lambda_control::sweep::SweepError;
use lambda_control::zero_occupancy::SolverError;

use commands::SweepStage;
use config::{FileConfig, ProblemConfig};

/// Environment variable consulted for the default worker count; the
/// `--workers` flag wins.
const WORKERS_ENV: &str = "LAMBDA_CONTROL_WORKERS";

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or invalid input (exit code 2).
    Validation(String),
    /// Verification or convergence failure (exit code 3).
    Verification(String),
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> CliError {
        CliError::Validation(msg.into())
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Verification(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Verification(m) => write!(f, "verification failure: {m}"),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> CliError {
        match &e {
            SolverError::VerificationFailed { .. } => CliError::Verification(e.to_string()),
            SolverError::Dynamics(DynamicsError::BlowUp { .. }) => {
                CliError::Verification(e.to_string())
            }
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> CliError {
        match &e {
            SweepError::NoCandidates { .. } => CliError::Verification(e.to_string()),
            SweepError::Dynamics(DynamicsError::BlowUp { .. }) => {
                CliError::Verification(e.to_string())
            }
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<BoundsError> for CliError {
    fn from(e: BoundsError) -> CliError {
        CliError::Validation(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "lambda-control",
    about = "Energy- and occupancy-optimal state transfer for a three-level Lambda system",
    version
)]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// TOML configuration file (unknown keys are rejected).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for the sweep (flag > env > all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Override the integrator step count.
    #[arg(long, global = true)]
    steps: Option<usize>,
    /// Output directory for CSV/JSON artifacts.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum StageArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    #[value(name = "3")]
    Three,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic zero-penalty (minimum-energy) solution with verification.
    ZeroOccupancy,
    /// Cost bracket, ‖P‖ box and |h9| cap for the configured gamma0.
    Bounds,
    /// Staged grid search inside the analytic box.
    Sweep {
        #[arg(long, value_enum, default_value = "all")]
        stage: StageArg,
        /// Also scan the coarse h9_tilde tail in [80, bound].
        #[arg(long)]
        tail_sweep: bool,
    },
    /// Integrate an explicit seed and write the time series.
    Integrate {
        /// Seed as `p,b,d,h9` (e.g. from the stage-3 best record).
        #[arg(long, allow_hyphen_values = true)]
        seed: String,
    },
    /// Full benchmark pipeline: zero-occupancy, bounds, staged sweep with
    /// the published windows, and the final integration.
    ReproducePaper {
        #[arg(long)]
        tail_sweep: bool,
    },
}

fn load_config(args: &CommonArgs) -> Result<ProblemConfig, CliError> {
    let file: FileConfig = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
            toml::from_str(&text)
                .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    let mut cfg = ProblemConfig::resolve(file)?;
    if let Some(steps) = args.steps {
        if steps == 0 {
            return Err(CliError::validation("--steps must be positive"));
        }
        cfg.integrator_steps = steps;
    }
    if let Some(dir) = &args.output {
        cfg.output_dir = dir.clone();
    }
    if let Some(w) = args.workers {
        cfg.workers = Some(w);
    } else if cfg.workers.is_none() {
        if let Ok(v) = std::env::var(WORKERS_ENV) {
            let parsed = v
                .parse::<usize>()
                .map_err(|_| CliError::validation(format!("{WORKERS_ENV}={v} is not a number")))?;
            cfg.workers = Some(parsed);
        }
    }
    Ok(cfg)
}

fn parse_seed(text: &str) -> Result<ExtremalSeed, CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(CliError::validation(format!(
            "--seed expects `p,b,d,h9`, got `{text}`"
        )));
    }
    let mut vals = [0.0f64; 4];
    for (i, part) in parts.iter().enumerate() {
        vals[i] = part.parse().map_err(|_| {
            CliError::validation(format!("--seed component `{part}` is not a number"))
        })?;
    }
    ExtremalSeed::new(vals[0], vals[1], vals[2], vals[3])
        .map_err(|e| CliError::validation(e.to_string()))
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    let cfg = load_config(&cli.common)?;
    if let Some(workers) = cfg.workers {
        if workers > 0 {
            rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build_global()
                .map_err(|e| CliError::validation(format!("thread pool: {e}")))?;
        }
    }
    let report = match &cli.command {
        Command::ZeroOccupancy => commands::cmd_zero_occupancy(&cfg)?,
        Command::Bounds => commands::cmd_bounds(&cfg)?,
        Command::Sweep { stage, tail_sweep } => {
            let stage = match stage {
                StageArg::One => SweepStage::One,
                StageArg::Two => SweepStage::Two,
                StageArg::Three => SweepStage::Three,
                StageArg::All => SweepStage::All,
            };
            commands::cmd_sweep(&cfg, stage, *tail_sweep, false)?
        }
        Command::Integrate { seed } => {
            let seed = parse_seed(seed)?;
            commands::cmd_integrate(&cfg, &seed)?
        }
        Command::ReproducePaper { tail_sweep } => commands::cmd_reproduce(&cfg, *tail_sweep)?,
    };
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}
