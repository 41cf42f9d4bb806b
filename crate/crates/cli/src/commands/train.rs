use std::path::PathBuf;

use clap::Args;

use itemgraph::data::artifacts;
use itemgraph::model::write_model;
use itemgraph::train::fit;

use crate::config::RunConfig;
use crate::error::{usage, CliResult};
use crate::lock::DirLock;

/// Train on the prepared transductive split and write the model file and the
/// per-epoch history.
#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Run configuration file (TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Run directory holding prepared artifacts; overrides output.dir.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Embedding dimension; overrides train.dim.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Convolution depth; overrides train.depth.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Neighbors kept per item (0 = unpruned); overrides train.top_k.
    #[arg(long)]
    pub top_k: Option<usize>,
    /// User-profile dropout probability; overrides train.dropout_p.
    #[arg(long)]
    pub dropout: Option<f64>,
    /// L2 coefficient; overrides train.l2_reg.
    #[arg(long)]
    pub l2: Option<f64>,
    /// Learning rate; overrides train.learning_rate.
    #[arg(long)]
    pub lr: Option<f64>,
    /// Batch size; overrides train.batch_size.
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Epoch budget; overrides train.epochs.
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Early-stop patience; overrides train.patience.
    #[arg(long)]
    pub patience: Option<usize>,
    /// Training seed; overrides train.seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// After tuning, retrain on train+validation for the best epoch count.
    #[arg(long)]
    pub final_retrain: bool,
    /// Also write the pruned item graph as a `key<TAB>key<TAB>weight` list.
    #[arg(long)]
    pub export_graph: Option<PathBuf>,
}

pub fn run(args: TrainArgs) -> CliResult<()> {
    let mut config = RunConfig::load(args.config.as_deref())?;
    if args.out.is_some() {
        config.output.dir = args.out;
    }
    if let Some(v) = args.dim {
        config.train.dim = v;
    }
    if let Some(v) = args.depth {
        config.train.depth = v;
    }
    if let Some(v) = args.top_k {
        config.train.top_k = v;
    }
    if let Some(v) = args.dropout {
        config.train.dropout_p = v;
    }
    if let Some(v) = args.l2 {
        config.train.l2_reg = v;
    }
    if let Some(v) = args.lr {
        config.train.learning_rate = v;
    }
    if let Some(v) = args.batch_size {
        config.train.batch_size = v;
    }
    if let Some(v) = args.epochs {
        config.train.epochs = v;
    }
    if args.patience.is_some() {
        config.train.patience = args.patience;
    }
    if let Some(v) = args.seed {
        config.train.seed = v;
    }
    config.validate()?;

    let run_dir = config.output_dir()?.to_path_buf();
    let split_dir = run_dir.join("transductive");
    if !split_dir.join("split.meta").exists() {
        return Err(usage(format!(
            "no prepared split at {} (run `itemgraph prepare` first)",
            split_dir.display()
        )));
    }
    let _lock = DirLock::acquire(&run_dir)?;

    let split = artifacts::load_dataset_split(&split_dir)?;
    let train_config = config.train_config();

    let (model, history) = fit(&split.train, Some(&split.validation), &train_config)?;
    let best_epoch = history.best_epoch.unwrap_or(train_config.epochs);

    let model = if args.final_retrain {
        // Validation is merged into training, so early stopping has no
        // holdout left; rerun for exactly the tuned number of epochs.
        let merged = split.train.merge(&split.validation)?;
        let mut retrain = train_config.clone();
        retrain.epochs = best_epoch;
        retrain.patience = None;
        log::info!("retraining on train+validation for {best_epoch} epochs");
        let (model, _) = fit(&merged, None, &retrain)?;
        model
    } else {
        model
    };

    let model_path = run_dir.join("model.bin");
    write_model(&model, &model_path)?;
    std::fs::write(run_dir.join("history.tsv"), history.to_tsv())?;

    if let Some(path) = &args.export_graph {
        use std::io::Write;
        let keys = model.item_map();
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        for (i, j, w) in model.propagation().edges().filter(|&(i, j, _)| i != j) {
            writeln!(out, "{}\t{}\t{w:.6}", keys.key(i), keys.key(j))?;
        }
        out.flush()?;
        log::info!("item graph -> {}", path.display());
    }

    if let Some(last) = history.epochs.last() {
        println!(
            "trained {} epochs (best {}), final loss {:.4}",
            last.epoch, best_epoch, last.loss
        );
    }
    if let Some(report) = history
        .epochs
        .iter()
        .find(|e| e.epoch == best_epoch)
        .and_then(|e| e.validation.as_ref())
    {
        println!("best validation:\n{report}");
    }
    println!("model -> {}", model_path.display());
    Ok(())
}
