//! `itemgraph`: train and serve an inductive item-graph recommender from
//! delimiter-separated implicit feedback logs.

mod commands;
mod config;
mod error;
mod lock;
mod manifest;

use clap::{Parser, Subcommand};

use crate::error::CliResult;

#[derive(Parser)]
#[command(
    name = "itemgraph",
    version,
    about = "Item-graph convolution recommender: prepare data, train, evaluate, recommend, sweep"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest, k-core filter and split a raw interaction file.
    Prepare(commands::prepare::PrepareArgs),
    /// Train item embeddings on a prepared split.
    Train(commands::train::TrainArgs),
    /// Score a trained model under a protocol.
    Evaluate(commands::evaluate::EvaluateArgs),
    /// Rank items for an ad-hoc profile of item keys.
    Recommend(commands::recommend::RecommendArgs),
    /// Train across a hyperparameter grid and tabulate results.
    Sweep(commands::sweep::SweepArgs),
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Prepare(args) => commands::prepare::run(args),
        Command::Train(args) => commands::train::run(args),
        Command::Evaluate(args) => commands::evaluate::run(args),
        Command::Recommend(args) => commands::recommend::run(args),
        Command::Sweep(args) => commands::sweep::run(args),
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    if let Err(e) = dispatch(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.code);
    }
}
