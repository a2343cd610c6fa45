//! `soph-pricing`: equilibrium sweeps, simulations and certificates for the
//! naive/sophisticated repeated-sale pricing model.

mod commands;
mod output;
mod parse;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use soph_pricing::Exec;

use crate::output::Format;
use crate::parse::{DistArg, MuGrid};

#[derive(Parser, Debug)]
#[command(name = "soph-pricing", version, about = "Pricing equilibria with naive and sophisticated buyers")]
struct Cli {
    /// Write output here (atomically) instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format; tables default to csv, `solve` and `verify-infinite` to json.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads; 1 runs everything sequentially. Defaults to all cores.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    workers: Option<u16>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct DistMu {
    /// uniform, power:<c> or table:<path>
    #[arg(long, default_value = "uniform")]
    dist: DistArg,
    /// A value or an inclusive start:end:step grid.
    #[arg(long)]
    mu: MuGrid,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Equilibrium table over a mu grid.
    Sweep {
        #[command(flatten)]
        args: DistMu,
        /// Bisection width for the regime boundary reported in JSON output.
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
    },
    /// Equilibrium at a single mu, with its full continuation.
    Solve {
        #[command(flatten)]
        args: DistMu,
    },
    /// Monte-Carlo play of the equilibrium at each grid mu.
    Simulate {
        #[command(flatten)]
        args: DistMu,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// One-shot-deviation certificate for a discrete infinite-horizon model.
    VerifyInfinite {
        /// Model file, TOML or JSON by extension.
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = commands::ProfileArg::Example3pt)]
        profile: commands::ProfileArg,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Also bisect for the largest naive mass the profile survives.
        #[arg(long)]
        epsilon_search: bool,
    },
    /// Optimal committed price schedules over a mu grid.
    Commitment {
        #[command(flatten)]
        args: DistMu,
    },
    /// Closed-form uniform-value equilibrium over a mu grid.
    LinearOracle {
        #[arg(long)]
        mu: MuGrid,
    },
}

fn exec_for(workers: Option<u16>) -> anyhow::Result<Exec> {
    match workers {
        Some(1) => Ok(Exec::Sequential),
        #[cfg(feature = "parallel")]
        Some(n) => {
            rayon::ThreadPoolBuilder::new().num_threads(n as usize).build_global()?;
            Ok(Exec::Parallel)
        }
        #[cfg(not(feature = "parallel"))]
        Some(_) => {
            eprintln!("warning: built without the parallel feature; --workers is ignored");
            Ok(Exec::Sequential)
        }
        None => Ok(Exec::Parallel),
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let exec = exec_for(cli.workers)?;
    let bytes = match cli.command {
        Command::Sweep { args, tol } => commands::sweep(&args.dist, &args.mu, tol, cli.format, exec)?,
        Command::Solve { args } => commands::solve(&args.dist, &args.mu, cli.format, exec)?,
        Command::Simulate { args, trials, seed } => {
            commands::simulate(&args.dist, &args.mu, trials, seed, cli.format, exec)?
        }
        Command::VerifyInfinite { model, profile, tol, epsilon_search } => {
            commands::verify_infinite(&model, profile, tol, epsilon_search, cli.format)?
        }
        Command::Commitment { args } => commands::commitment(&args.dist, &args.mu, cli.format, exec)?,
        Command::LinearOracle { mu } => commands::linear_oracle(&mu, cli.format)?,
    };
    output::emit(&bytes, cli.out.as_deref())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
