//! `palmsense`: command-line surface for the tactile pipeline.
//!
//! Subcommands mirror the lab workflow: `simulate` produces datasets and raw
//! recordings, `calibrate` turns an idle recording into a baseline profile,
//! `train`/`eval` handle the force-regression model, `localize` replays a
//! recording through the contact estimator, and `accuracy` scores the
//! estimator against simulator ground truth.

mod commands;
mod simflags;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "palmsense", version, about = "Tactile palm contact-state tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate datasets or raw frame recordings from the palm simulator.
    Simulate(commands::simulate::Args),
    /// Estimate per-channel baselines and noise scales from an idle recording.
    Calibrate(commands::calibrate::Args),
    /// Fit the force-regression mixture and write a model file.
    Train(commands::train::Args),
    /// Evaluate a model on a labeled dataset and report RMSE.
    Eval(commands::eval::Args),
    /// Replay a recording and emit per-frame contact estimates.
    Localize(commands::localize::Args),
    /// Score contact localization against simulator ground truth.
    Accuracy(commands::accuracy::Args),
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => commands::simulate::run(args),
        Command::Calibrate(args) => commands::calibrate::run(args),
        Command::Train(args) => commands::train::run(args),
        Command::Eval(args) => commands::eval::run(args),
        Command::Localize(args) => commands::localize::run(args),
        Command::Accuracy(args) => commands::accuracy::run(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
