//! `corank` command-line front end.
//!
//! Exit status: 0 when a check passes (or is verified up to its horizon),
//! 1 when a certificate fails, 2 on usage, input or parse errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "corank", version, about = "Liveness semantics and ranking certificates")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SynthKind {
    Rank,
    Drank,
    Ncrank,
    Trank,
}

#[derive(Subcommand)]
pub enum Command {
    /// Print the least-fixed-point semantics of a model.
    Solve {
        model: PathBuf,
        /// Only report this state.
        #[arg(long)]
        state: Option<String>,
        /// Bounded iteration: n-step reachability (probabilistic models only).
        #[arg(long)]
        iter: Option<usize>,
    },
    /// Check a certificate against a model.
    Check {
        model: PathBuf,
        cert: PathBuf,
        /// Override the horizon of a distribution certificate.
        #[arg(long)]
        horizon: Option<u64>,
        /// Attach the exact semantics to the report.
        #[arg(long)]
        reference: bool,
    },
    /// Write the optimal certificate of the given kind.
    Synthesize {
        model: PathBuf,
        #[arg(long, value_enum)]
        kind: SynthKind,
        /// Rank cap: a natural number or `omega` (rank).
        #[arg(long)]
        cap: Option<String>,
        /// Discount factor in [0,1) (ncrank).
        #[arg(long)]
        gamma: Option<String>,
        /// Exact horizon (drank).
        #[arg(long)]
        horizon: Option<u64>,
        /// Write to this file instead of stdout.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Print the positional strategy read off a rank certificate.
    Strategy {
        model: PathBuf,
        cert: PathBuf,
    },
    /// Solve the discounted system for a schedule of discount factors.
    Sweep {
        model: PathBuf,
        /// Comma-separated discount factors; default 1-2^-k for k=1..20.
        #[arg(long, value_delimiter = ',')]
        gammas: Option<Vec<String>>,
    },
    /// Estimate reachability by simulation.
    Simulate {
        model: PathBuf,
        #[arg(long)]
        state: String,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = 1000)]
        max_steps: usize,
        /// Overridden by the CORANK_SEED environment variable.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command, cli.format) {
        Ok(outcome) => ExitCode::from(outcome as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
