//! `brank`: certify, bound and probe the border rank of small tensors.

mod commands;
mod render;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use brank::Field;

pub const EXIT_USAGE: u8 = 64;
pub const EXIT_DATA: u8 = 65;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser, Serialize)]
#[command(name = "brank", version, about = "Border-rank certification, bounds and probes for small dense tensors")]
#[command(after_help = "Exit codes: 0 certified, passed or done; 1 violated; 2 inconclusive; 64 usage error; 65 data error.")]
pub struct Cli {
    /// Master seed; every random choice is derived from it per task.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Arithmetic: exact rationals or binary64 floats.
    #[arg(long, global = true, default_value = "rational")]
    pub field: Field,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    /// Print only the result, without the configuration echo.
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Worker threads (default: available parallelism). Results do not depend on it.
    #[arg(long, global = true, env = "BRANK_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum Command {
    /// Generate a random tensor of rank at most R as a sum of R pure
    /// tensors with nonzero integer factors in [-bound, bound].
    Gen(commands::GenArgs),
    /// Decide whether the border rank is at most K. Violations carry a
    /// nonvanishing flattening minor or Strassen value; for K <= 2 the
    /// flattening minors are a complete test, otherwise random
    /// contractions to P0 modes are tested and a pass is inconclusive.
    Certify(commands::CertifyArgs),
    /// Flattening ranks: one flattening by its row modes, or all
    /// bipartitions together with the resulting lower bound.
    Flatten(commands::FlattenArgs),
    /// Dimension of the degree-D part of the ideal of tensors of rank at
    /// most K, from the kernel of monomials evaluated at random rank-K
    /// tensors modulo two random primes.
    Probe(commands::ProbeArgs),
    /// Complete a tensor with flattening ranks at most k from its boundary
    /// slabs through an invertible k x k pivot minor.
    #[command(subcommand)]
    Complete(commands::CompleteCommand),
    /// Words over {0..n-1} under substitution monoids.
    #[command(subcommand)]
    Orbit(commands::OrbitCommand),
    /// General Markov model tensors on trees and their membership tests.
    #[command(subcommand)]
    Phylo(commands::PhyloCommand),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(EXIT_USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_DATA);
        }
    }
    match commands::run(&cli) {
        Ok(outcome) => {
            print!("{}", render::envelope(&cli, &outcome));
            ExitCode::from(outcome.exit)
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = if matches!(e, brank::Error::InvalidArgument(_)) { EXIT_USAGE } else { EXIT_DATA };
            ExitCode::from(code)
        }
    }
}
