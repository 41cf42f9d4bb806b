use std::path::PathBuf;

use clap::Args;

use itemgraph::model::read_model;
use itemgraph::Error;

use crate::error::{runtime, usage, CliResult};

/// Rank items for an ad-hoc profile given as item keys. Works for any user,
/// including one the model never saw: the embedding is built on the fly.
#[derive(Debug, Args)]
pub struct RecommendArgs {
    /// Trained model file.
    #[arg(long)]
    pub model: PathBuf,
    /// Profile item keys, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub items: Vec<String>,
    /// File with one profile item key per line (merged with --items).
    #[arg(long)]
    pub profile_file: Option<PathBuf>,
    /// How many recommendations to print.
    #[arg(short, default_value_t = 10)]
    pub n: usize,
    /// Keep profile items in the candidate list instead of excluding them.
    #[arg(long)]
    pub include_profile: bool,
}

pub fn run(args: RecommendArgs) -> CliResult<()> {
    if args.n < 1 {
        return Err(usage("-n must be >= 1".into()));
    }
    let mut keys = args.items.clone();
    if let Some(path) = &args.profile_file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read profile file {}: {e}", path.display())))?;
        keys.extend(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from));
    }
    if keys.is_empty() {
        return Err(usage("no profile items given (use --items or --profile-file)".into()));
    }

    let model = read_model(&args.model)?;
    let mut profile = Vec::new();
    let mut unknown = Vec::new();
    for key in &keys {
        match model.item_map().index_of(key) {
            Some(idx) => profile.push(idx),
            None => unknown.push(key.clone()),
        }
    }
    if profile.is_empty() {
        return Err(runtime(Error::UnknownItemKeys(unknown).to_string()));
    }
    for key in &unknown {
        log::warn!("skipping unknown item key {key:?}");
    }
    profile.sort_unstable();
    profile.dedup();

    let recs = model.recommend(&profile, args.n, !args.include_profile)?;
    for (item, score) in recs {
        println!("{}\t{score:.6}", model.item_map().key(item));
    }
    Ok(())
}
