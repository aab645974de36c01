//! `elastowave`: batch experiments for the elastic wave propagator.
//!
//! Exit codes: 0 pass, 1 usage or configuration error, 2 a numerical
//! tolerance was missed, 3 I/O failure.

// threshold checks are written `!(x <= limit)` so that NaN fails them
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod data;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "elastowave", version, about = "Elastic wave propagator experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

/// Flags shared by every command. Flags win over the config file.
#[derive(Debug, Clone, clap::Args)]
pub struct Common {
    /// JSON run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// RNG seed for randomized suites.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; all available cores when omitted.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Only print warnings and the final verdict.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Diagonalization, oracle, unitarity and partition checks on random frequencies.
    SymbolCheck,
    /// Propagate initial data and log energies and fronts.
    Propagate,
    /// Sharpness sweep of the maximal estimate over dyadic scales.
    Sharpness,
    /// Convergence to the initial data along lines.
    Converge,
}

#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Tolerance(String),
    #[error("{0}")]
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Tolerance(_) => 2,
            Failure::Io(_) => 3,
        }
    }
}

impl From<elastowave::Error> for Failure {
    fn from(e: elastowave::Error) -> Self {
        match e {
            elastowave::Error::Io(_) | elastowave::Error::Format(_) => Failure::Io(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.common.quiet { "warn" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    if let Some(k) = cli.common.threads {
        if k == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: cannot start thread pool: {e}");
            return ExitCode::from(1);
        }
    }

    let result = match cli.command {
        Command::SymbolCheck => commands::symbol_check::run(&cli.common),
        Command::Propagate => commands::propagate::run(&cli.common),
        Command::Sharpness => commands::sharpness::run(&cli.common),
        Command::Converge => commands::converge::run(&cli.common),
    };
    match result {
        Ok(()) => {
            println!("PASS");
            ExitCode::SUCCESS
        }
        Err(f) => {
            match &f {
                Failure::Tolerance(msg) => println!("FAIL: {msg}"),
                other => eprintln!("error: {other}"),
            }
            ExitCode::from(f.code())
        }
    }
}
