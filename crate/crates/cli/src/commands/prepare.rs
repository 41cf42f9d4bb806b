use std::path::PathBuf;

use clap::Args;

use itemgraph::data::{
    artifacts, build_matrix, kcore_filter, load_interactions, split_per_user, split_user_holdout,
    LoadOptions,
};

use crate::config::{ProtocolChoice, RunConfig};
use crate::error::{usage, CliResult};
use crate::lock::DirLock;
use crate::manifest::{DatasetInfo, HoldoutInfo, Manifest, SplitInfo};

/// Ingest the raw interaction file, apply the k-core filter, and write split
/// artifacts plus a manifest into the run directory.
#[derive(Debug, Args)]
pub struct PrepareArgs {
    /// Run configuration file (TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Raw interaction file; overrides data.path.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Field separator (e.g. ",", "\t", "::"); overrides data.delimiter.
    #[arg(long)]
    pub delimiter: Option<String>,
    /// Keep only records with rating >= this; overrides data.positive_threshold.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Leading non-comment lines to skip; overrides data.skip_lines.
    #[arg(long)]
    pub skip_lines: Option<usize>,
    /// k-core order; overrides data.k_core.
    #[arg(long)]
    pub k_core: Option<usize>,
    /// Run directory; overrides output.dir.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Split seed; overrides split.seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Which split artifacts to write; overrides split.protocol.
    #[arg(long, value_enum)]
    pub protocol: Option<ProtocolChoice>,
}

pub fn run(args: PrepareArgs) -> CliResult<()> {
    let mut config = RunConfig::load(args.config.as_deref())?;
    if args.data.is_some() {
        config.data.path = args.data;
    }
    if args.delimiter.is_some() {
        config.data.delimiter = args.delimiter;
    }
    if args.threshold.is_some() {
        config.data.positive_threshold = args.threshold;
    }
    if let Some(s) = args.skip_lines {
        config.data.skip_lines = s;
    }
    if let Some(k) = args.k_core {
        config.data.k_core = k;
    }
    if args.out.is_some() {
        config.output.dir = args.out;
    }
    if let Some(seed) = args.seed {
        config.split.seed = seed;
    }
    if let Some(p) = args.protocol {
        config.split.protocol = p;
    }
    config.validate()?;

    let data_path = config
        .data
        .path
        .as_deref()
        .ok_or_else(|| usage("data.path is required (set it in the config or pass --data)".into()))?;
    if !data_path.exists() {
        return Err(usage(format!("data file not found: {}", data_path.display())));
    }
    let run_dir = config.output_dir()?.to_path_buf();
    let _lock = DirLock::acquire(&run_dir)?;

    let load_opts = LoadOptions {
        positive_threshold: config.data.positive_threshold,
        delimiter: config.data.delimiter.clone(),
        skip_lines: config.data.skip_lines,
    };
    let records = load_interactions(data_path, &load_opts)?;
    let raw = build_matrix(&records)?;
    log::info!(
        "loaded {} interactions, {} users, {} items",
        raw.nnz(),
        raw.n_users(),
        raw.n_items()
    );
    let matrix = kcore_filter(&raw, config.data.k_core)?;

    artifacts::save_matrix(
        &matrix,
        &run_dir.join("matrix"),
        &[("k_core", config.data.k_core.to_string())],
    )?;

    let s = &config.split;
    let mut manifest = Manifest {
        dataset: DatasetInfo {
            source: data_path.display().to_string(),
            positive_threshold: config.data.positive_threshold,
            delimiter: config.data.delimiter.clone(),
            skip_lines: config.data.skip_lines,
            k_core: config.data.k_core,
            n_users: matrix.n_users(),
            n_items: matrix.n_items(),
            n_interactions: matrix.nnz(),
            universe_hash: matrix.universe_hash(),
        },
        transductive: None,
        inductive: None,
    };

    if matches!(s.protocol, ProtocolChoice::Transductive | ProtocolChoice::Both) {
        let split = split_per_user(&matrix, s.train_frac, s.val_frac, s.seed)?;
        artifacts::save_dataset_split(&split, s.train_frac, s.val_frac, &run_dir.join("transductive"))?;
        manifest.transductive = Some(SplitInfo {
            dir: "transductive".into(),
            seed: s.seed,
            train_frac: s.train_frac,
            val_frac: s.val_frac,
        });
    }
    if matches!(s.protocol, ProtocolChoice::Inductive | ProtocolChoice::Both) {
        let holdout = split_user_holdout(&matrix, s.unseen_frac, s.profile_build_frac, s.seed)?;
        artifacts::save_user_holdout(
            &holdout,
            s.unseen_frac,
            s.profile_build_frac,
            &run_dir.join("inductive"),
        )?;
        manifest.inductive = Some(HoldoutInfo {
            dir: "inductive".into(),
            seed: s.seed,
            unseen_frac: s.unseen_frac,
            profile_build_frac: s.profile_build_frac,
        });
    }

    manifest.write(&run_dir)?;
    println!(
        "prepared {} users / {} items / {} interactions (k-core {}) -> {}",
        matrix.n_users(),
        matrix.n_items(),
        matrix.nnz(),
        config.data.k_core,
        run_dir.display()
    );
    Ok(())
}
