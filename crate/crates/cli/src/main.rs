mod commands;
mod config;
mod output;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use config::{Overrides, RunConfig};

/// Learn excited-state properties of molecules from their ground states
/// with a spin-symmetric quantum neural network, and benchmark it against
/// classical regressors.
#[derive(Parser)]
#[command(name = "siqnn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an integral bundle for schema, symmetry and grid problems.
    Validate { bundle: PathBuf },
    /// Diagonalize a bundle and write the target datasets.
    BuildDataset(Overrides),
    /// Train the circuit model on one training set per target.
    Train(Overrides),
    /// Run the replicated benchmark of all models.
    Benchmark(Overrides),
    /// Compare shot-sampled predictions with Hamiltonian measurement.
    ShotStudy(Overrides),
    /// Render SVG figures from CSV outputs.
    Plot {
        /// Benchmark records (records.csv); repeatable.
        #[arg(long)]
        records: Vec<PathBuf>,
        /// Predictions written by `train`; repeatable.
        #[arg(long)]
        predictions: Vec<PathBuf>,
        /// Shot-study rows (shots.csv); repeatable.
        #[arg(long)]
        shots: Vec<PathBuf>,
        #[arg(long, short, default_value = "figures")]
        output: PathBuf,
    },
    /// Print the effective configuration as TOML.
    Config(Overrides),
}

fn pipeline(o: &Overrides, f: fn(&RunConfig) -> Result<()>) -> Result<()> {
    let config = RunConfig::resolve(o)?;
    rayon::ThreadPoolBuilder::new().num_threads(config.threads).build_global()?;
    f(&config)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Validate { bundle } => return commands::validate(&bundle),
        Command::BuildDataset(o) => pipeline(&o, commands::build_datasets)?,
        Command::Train(o) => pipeline(&o, commands::train)?,
        Command::Benchmark(o) => pipeline(&o, commands::benchmark)?,
        Command::ShotStudy(o) => pipeline(&o, commands::shots)?,
        Command::Plot { records, predictions, shots, output } => {
            for p in plot::plot(&records, &predictions, &shots, &output)? {
                println!("wrote {}", p.display());
            }
        }
        Command::Config(o) => print!("{}", RunConfig::resolve(&o)?.to_toml()),
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
