//! `herdlab`: simulate herding in rating streams, evaluate convergence
//! speed, and infer herding strength from data.

mod commands;
mod output;
mod parse;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "herdlab", version, about = "Herding effects in product ratings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Output directory (created if missing).
    #[arg(long, default_value = "herdlab-out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Number of rating levels M.
    #[arg(long, default_value_t = 5)]
    pub levels: usize,
    /// Also print the main data file to stdout.
    #[arg(long)]
    #[serde(skip)]
    pub stdout: bool,
}

/// Columns of an input ratings CSV.
#[derive(Debug, Clone, Args, Serialize)]
pub struct Columns {
    #[arg(long, default_value = "item_id")]
    pub item_column: String,
    #[arg(long, default_value = "order_key")]
    pub order_column: String,
    #[arg(long, default_value = "rating")]
    pub rating_column: String,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a rating sequence.
    Simulate(commands::SimulateArgs),
    /// Tabulate the convergence-speed metric over index and parameter grids.
    Phi(commands::PhiArgs),
    /// Estimate the ground truth and herding strength from a ratings file.
    Infer(commands::InferArgs),
    /// Monte Carlo estimation-error curves.
    Mc(commands::McArgs),
    /// Per-item inference over a dataset, with CDF and exponent sweep.
    Analyze(commands::AnalyzeArgs),
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("HERDLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| parse::usage(format!("HERDLAB_THREADS=`{raw}` is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Simulate(a) => commands::simulate(&a),
        Command::Phi(a) => commands::phi(&a),
        Command::Infer(a) => commands::infer(&a),
        Command::Mc(a) => commands::mc(&a),
        Command::Analyze(a) => commands::analyze(&a),
    }
}

/// 2 for bad input, 1 for everything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<parse::Usage>().is_some() {
        return 2;
    }
    match err.downcast_ref::<herdlab_core::Error>() {
        Some(e) if e.is_validation() => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
