//! `nevpick`: constrained Nevanlinna-Pick problems from TOML configs.
//!
//! Reports go to stdout as JSON, a one-line summary to stderr. Exit codes:
//! 0 feasible or success, 1 infeasible or negative result, 2 indeterminate,
//! 3 invalid input, 4 internal assertion.

mod commands;
mod config;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::ConfigError;

const EXIT_INVALID: u8 = 3;
const SEED_VAR: &str = "NEVPICK_SEED";

#[derive(Parser)]
#[command(name = "nevpick", version, about = "Constrained Nevanlinna-Pick interpolation for C + B H-infinity")]
struct Cli {
    /// Overrides the config's seed and $NEVPICK_SEED.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the constrained Pick matrices over the model space.
    Feasibility {
        config: PathBuf,
        /// Write the m = 2 grid of λ_min to this CSV file.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Grid points per angle for --csv.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Exact quotient norm of the data class (needs a node at a zero of B).
    Norm { config: PathBuf },
    /// Dimension of the generated C*-algebra and its commutant.
    Envelope {
        #[arg(required_unless_present = "grid")]
        config: Option<PathBuf>,
        /// Run the m in {2,3,4} x (n-r) in {1,2,3} grid instead of a config.
        #[arg(long, conflicts_with = "config")]
        grid: bool,
    },
    /// Build an interpolant in H∞_B (no norm control).
    Construct { config: PathBuf },
    /// Canonical forms, meet and join of invariant subspaces.
    Lattice { config: PathBuf },
    /// Search for matrix data passing the Pick sweep with quotient norm > 1.
    GapSearch {
        config: PathBuf,
        /// Comma-separated seeds; defaults to the config's [gap] seeds.
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        /// Attempts per seed.
        #[arg(long)]
        budget: Option<usize>,
        /// Write the instance found to this JSON file.
        #[arg(long)]
        fixture: Option<PathBuf>,
    },
    /// Print the Grammian of the compression basis as CSV.
    Grammian { config: PathBuf },
}

#[derive(Debug)]
pub enum Failure {
    Config(ConfigError),
    Core(nevpick_core::Error),
    Io(String),
    Usage(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<nevpick_core::Error> for Failure {
    fn from(e: nevpick_core::Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        use nevpick_core::Error::*;
        match self {
            Failure::Config(_) | Failure::Usage(_) | Failure::Io(_) => EXIT_INVALID,
            Failure::Core(e) => match e {
                InvalidParameter(_) | AmbiguousMatch { .. } | NearDependentBasis { .. } | Unsupported(_)
                | DimensionMismatch { .. } => EXIT_INVALID,
                InfeasibleByStructure(_) | BudgetExhausted(_) => commands::EXIT_NEGATIVE,
                RankTolerance(_) | Separation { .. } => commands::EXIT_INDETERMINATE,
                Internal(_) => commands::EXIT_INTERNAL,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Config(e) => e.to_string(),
            Failure::Core(e) => e.to_string(),
            Failure::Io(m) | Failure::Usage(m) => m.clone(),
        }
    }
}

/// Flag, then config, then environment, then 0.
fn resolve_seed(flag: Option<u64>, config: Option<u64>) -> Result<u64, Failure> {
    if let Some(s) = flag.or(config) {
        return Ok(s);
    }
    match std::env::var(SEED_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("{SEED_VAR}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

fn run(cli: Cli) -> Result<commands::Outcome, Failure> {
    let load = |path: &PathBuf| config::load(path).map_err(Failure::from);
    match &cli.command {
        Command::Feasibility { config, csv, grid } => {
            let cfg = load(config)?;
            let seed = resolve_seed(cli.seed, cfg.config.seed)?;
            commands::feasibility(&cfg, seed, csv.as_deref(), *grid)
        }
        Command::Norm { config } => commands::norm(&load(config)?),
        Command::Envelope { config, .. } => match config {
            Some(path) => commands::envelope(Some(&load(path)?)),
            None => commands::envelope(None),
        },
        Command::Construct { config } => {
            let cfg = load(config)?;
            let seed = resolve_seed(cli.seed, cfg.config.seed)?;
            commands::construct(&cfg, seed)
        }
        Command::Lattice { config } => commands::lattice(&load(config)?),
        Command::GapSearch {
            config,
            seeds,
            budget,
            fixture,
        } => {
            let cfg = load(config)?;
            let seeds = if !seeds.is_empty() {
                seeds.clone()
            } else if let Some(s) = cfg.config.gap.seeds.clone() {
                s
            } else {
                vec![resolve_seed(cli.seed, cfg.config.seed)?]
            };
            commands::gap_search(&cfg, &seeds, *budget, fixture.as_deref())
        }
        Command::Grammian { config } => commands::grammian_csv(&load(config)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.stdout.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(EXIT_INVALID);
            }
            if let Some(s) = out.summary {
                eprintln!("{s}");
            }
            ExitCode::from(out.code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
