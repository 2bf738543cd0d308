//! Batch CLI for ranking-model adaptation: training, boosting-based
//! adaptation, interpolation, kNN data augmentation, evaluation, and a
//! closed/open experiment runner with a synthetic data generator.

mod commands;
mod experiment;
mod synth;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{AdaptArgs, AugmentArgs, EvaluateArgs, InterpolateArgs, TrainArgs};
use experiment::ExperimentArgs;
use synth::SynthArgs;

/// Exit codes: 0 success, 2 usage/validation, 3 degenerate data, 1 internal.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Degenerate(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Degenerate(_) => 3,
            CliError::Internal(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Degenerate(m) | CliError::Internal(m) => m,
        }
    }
}

impl From<rankadapt::Error> for CliError {
    fn from(err: rankadapt::Error) -> Self {
        use rankadapt::Error as E;
        match err {
            E::NoEvaluableQueries | E::DegenerateBasis | E::AllFeaturesDegenerate => {
                CliError::Degenerate(err.to_string())
            }
            E::NonFiniteUpdate { .. } => CliError::Internal(err.to_string()),
            _ => CliError::Usage(err.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "rankadapt",
    version,
    about = "Ranking-model adaptation: training, boosting, interpolation, and evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a linear ranker on a LETOR file
    Train(TrainArgs),
    /// Adapt a background model by boosting on in-domain data
    Adapt(AdaptArgs),
    /// Interpolate component models with weights tuned on validation data
    Interpolate(InterpolateArgs),
    /// Expand in-domain data with near-duplicate background documents
    Augment(AugmentArgs),
    /// Evaluate models on a dataset and print a TSV report
    Evaluate(EvaluateArgs),
    /// Run a full closed/open adaptation experiment from a spec file
    Experiment(ExperimentArgs),
    /// Generate synthetic datasets with controlled distribution shift
    Synth(SynthArgs),
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(args) => commands::train(&args),
        Command::Adapt(args) => commands::adapt(&args),
        Command::Interpolate(args) => commands::interpolate(&args),
        Command::Augment(args) => commands::augment(&args),
        Command::Evaluate(args) => commands::evaluate(&args),
        Command::Experiment(args) => experiment::run(&args),
        Command::Synth(args) => synth::run(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.code())
        }
    }
}
