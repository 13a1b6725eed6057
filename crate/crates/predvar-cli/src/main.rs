//! Experiment orchestration for controlled-randomness ensembles and
//! activation-strength variation estimation.
//!
//! Exit codes: 0 success, 1 usage/config error, 2 data error,
//! 3 training/numeric error.

mod commands;
mod common;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use predvar::Error;

#[derive(Parser)]
#[command(
    name = "predvar",
    version,
    about = "Train controlled-randomness ensembles, quantify per-example prediction variation, and fit activation-strength variation estimators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest or generate a dataset and write canonical train/test dumps.
    PrepareData(commands::prepare_data::Args),
    /// Train an ensemble under a randomness setting; dump predictions,
    /// variation table, and target metrics.
    RunEnsemble(commands::run_ensemble::Args),
    /// Pairwise Pearson correlation matrix of variation tables.
    Correlate(commands::correlate::Args),
    /// Train and evaluate the activation-strength variation estimator.
    FitEstimator(commands::fit_estimator::Args),
    /// Delta-ratio sweep over ensemble sizes against a model universe.
    DeltaRatio(commands::delta_ratio::Args),
    /// Monte-Carlo dropout variation baseline, compared to an ensemble.
    DropoutBaseline(commands::dropout_baseline::Args),
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Usage(_) => 1,
        Error::Input(_) | Error::Parse { .. } | Error::Io { .. } => 2,
        Error::Training { .. } | Error::Numeric(_) => 3,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };

    let result = match cli.command {
        Command::PrepareData(args) => commands::prepare_data::run(args),
        Command::RunEnsemble(args) => commands::run_ensemble::run(args),
        Command::Correlate(args) => commands::correlate::run(args),
        Command::FitEstimator(args) => commands::fit_estimator::run(args),
        Command::DeltaRatio(args) => commands::delta_ratio::run(args),
        Command::DropoutBaseline(args) => commands::dropout_baseline::run(args),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
