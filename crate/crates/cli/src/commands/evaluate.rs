use std::path::PathBuf;

use clap::Args;

use itemgraph::data::{artifacts, universe_hash};
use itemgraph::eval::{evaluate_inductive, evaluate_transductive};
use itemgraph::model::read_model;
use itemgraph::Error;

use crate::config::ProtocolChoice;
use crate::error::{runtime, usage, CliResult};

/// Evaluate a model file against prepared split artifacts.
#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Trained model file.
    #[arg(long)]
    pub model: PathBuf,
    /// Run directory holding the prepared splits.
    #[arg(long)]
    pub splits: PathBuf,
    /// Which protocol to evaluate.
    #[arg(long, value_enum, default_value = "transductive")]
    pub protocol: ProtocolChoice,
    /// Ranking cutoffs, comma-separated.
    #[arg(long, value_delimiter = ',', default_values_t = vec![5usize, 20])]
    pub cutoffs: Vec<usize>,
    /// Also write the report as TSV to this file.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

pub fn run(args: EvaluateArgs) -> CliResult<()> {
    if args.cutoffs.is_empty() || args.cutoffs.iter().any(|&n| n == 0) {
        return Err(usage("cutoffs must be positive integers".into()));
    }
    let model = read_model(&args.model)?;
    let model_hash = universe_hash(model.item_map().keys());

    let dir = match args.protocol {
        ProtocolChoice::Transductive => args.splits.join("transductive"),
        ProtocolChoice::Inductive => args.splits.join("inductive"),
        ProtocolChoice::Both => {
            return Err(usage("pick one protocol for evaluation: transductive or inductive".into()))
        }
    };
    let header = artifacts::read_header(&dir)
        .map_err(|e| usage(format!("no prepared split at {}: {e}", dir.display())))?;
    if let Some(split_hash) = header.get("universe_hash") {
        if split_hash != model_hash {
            let err = Error::IncompatibleArtifacts {
                expected: split_hash.to_string(),
                got: model_hash,
            };
            return Err(runtime(err.to_string()));
        }
    }

    let report = match args.protocol {
        ProtocolChoice::Transductive => {
            let split = artifacts::load_dataset_split(&dir)?;
            evaluate_transductive(&model, &split, &args.cutoffs)?
        }
        ProtocolChoice::Inductive => {
            let holdout = artifacts::load_user_holdout(&dir)?;
            evaluate_inductive(&model, &holdout, &args.cutoffs)?
        }
        ProtocolChoice::Both => unreachable!(),
    };

    println!("{report}");
    if let Some(path) = &args.report {
        std::fs::write(path, report.to_tsv())?;
        log::info!("report -> {}", path.display());
    }
    Ok(())
}
