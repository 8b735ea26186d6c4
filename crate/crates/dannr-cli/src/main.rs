//! `dannr` — reproducible runner for domain-adversarial soft-sensor
//! experiments: synthetic fleet generation, training, evaluation, and the
//! full benchmark matrix.
//!
//! Verbosity is controlled by the `DANNR_LOG` environment variable
//! (`error`, `info`, or `debug`; default `info`). Every run writes a
//! resolved copy of its effective configuration next to its outputs.

use clap::{Parser, Subcommand};
use dannr_cli::commands;
use dannr_cli::commands::eval::EvalArgs;
use dannr_cli::commands::train::TrainArgs;
use dannr_cli::runconfig::CommonArgs;

#[derive(Parser)]
#[command(
    name = "dannr",
    version,
    about = "Domain-adversarial soft sensors: generate benchmark fleets, train, evaluate, and run experiment matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the synthetic turbine-fleet benchmark (one CSV per plant).
    Generate(CommonArgs),
    /// Train a baseline or domain-adversarial model from CSV datasets.
    Train(TrainArgs),
    /// Score a baseline/adversarial checkpoint pair on a source/target pair.
    Eval(EvalArgs),
    /// Run the transfer experiment matrix and aggregate the results.
    Bench(CommonArgs),
}

fn main() {
    let filter = std::env::var("DANNR_LOG").unwrap_or_else(|_| "info".to_string());
    env_logger::Builder::new()
        .parse_filters(&filter)
        .format_timestamp(None)
        .init();

    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate(args) => commands::generate::run(args),
        Command::Train(args) => commands::train::run(args),
        Command::Eval(args) => commands::eval::run(args),
        Command::Bench(args) => commands::bench::run(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
