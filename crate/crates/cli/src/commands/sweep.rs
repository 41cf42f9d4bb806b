use std::path::PathBuf;

use clap::Args;

use itemgraph::data::artifacts;
use itemgraph::eval::{run_sweep, SweepGrid};

use crate::config::RunConfig;
use crate::error::{usage, CliResult};
use crate::lock::DirLock;

/// Train and evaluate across a hyperparameter grid, averaging over seeds,
/// and write a plot-ready long-format table.
#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Run configuration file (TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Run directory holding the prepared matrix artifact; overrides output.dir.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Swept parameter: depth | dropout_p | top_k | train_user_fraction.
    #[arg(long)]
    pub parameter: String,
    /// Grid values, comma-separated ("full" is allowed for top_k).
    #[arg(long, value_delimiter = ',')]
    pub grid: Vec<String>,
    /// Seeds to average over, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Vec<u64>,
    /// Ranking cutoffs, comma-separated; overrides eval.cutoffs.
    #[arg(long, value_delimiter = ',')]
    pub cutoffs: Vec<usize>,
}

fn parse_grid(parameter: &str, grid: &[String]) -> CliResult<SweepGrid> {
    if grid.is_empty() {
        return Err(usage("sweep grid is empty".into()));
    }
    let bad = |value: &str, what: &str| usage(format!("bad {what} grid value {value:?}"));
    match parameter {
        "depth" => grid
            .iter()
            .map(|v| v.parse::<usize>().map_err(|_| bad(v, "depth")))
            .collect::<CliResult<Vec<_>>>()
            .map(SweepGrid::Depth),
        "dropout_p" => grid
            .iter()
            .map(|v| v.parse::<f64>().map_err(|_| bad(v, "dropout_p")))
            .collect::<CliResult<Vec<_>>>()
            .map(SweepGrid::DropoutP),
        "top_k" => grid
            .iter()
            .map(|v| {
                if v == "full" || v == "0" {
                    Ok(None)
                } else {
                    v.parse::<usize>().map(Some).map_err(|_| bad(v, "top_k"))
                }
            })
            .collect::<CliResult<Vec<_>>>()
            .map(SweepGrid::TopK),
        "train_user_fraction" => grid
            .iter()
            .map(|v| v.parse::<f64>().map_err(|_| bad(v, "train_user_fraction")))
            .collect::<CliResult<Vec<_>>>()
            .map(SweepGrid::TrainUserFraction),
        other => Err(usage(format!(
            "unknown sweep parameter {other:?} (expected depth, dropout_p, top_k or train_user_fraction)"
        ))),
    }
}

pub fn run(args: SweepArgs) -> CliResult<()> {
    let mut config = RunConfig::load(args.config.as_deref())?;
    if args.out.is_some() {
        config.output.dir = args.out;
    }
    if !args.cutoffs.is_empty() {
        config.eval.cutoffs = args.cutoffs.clone();
    }
    config.validate()?;

    let grid = parse_grid(&args.parameter, &args.grid)?;
    let seeds = if args.seeds.is_empty() {
        vec![config.train.seed]
    } else {
        args.seeds.clone()
    };

    let run_dir = config.output_dir()?.to_path_buf();
    let matrix_dir = run_dir.join("matrix");
    if !matrix_dir.join("split.meta").exists() {
        return Err(usage(format!(
            "no prepared matrix at {} (run `itemgraph prepare` first)",
            matrix_dir.display()
        )));
    }
    let _lock = DirLock::acquire(&run_dir)?;
    let matrix = artifacts::load_matrix(&matrix_dir)?;

    let result = run_sweep(
        &grid,
        &config.train_config(),
        &matrix,
        &seeds,
        &config.eval.cutoffs,
    )?;

    let table_path = run_dir.join(format!("sweep_{}.tsv", result.parameter));
    std::fs::write(&table_path, result.long_format_tsv())?;

    let summary_cutoff = config.eval.cutoffs.iter().copied().max().unwrap_or(20);
    println!("sweep over {} ({} seeds per point)", result.parameter, seeds.len());
    println!("{:>14} {:>14} {:>14} {:>12}", "value", format!("seen n@{summary_cutoff}"), format!("unseen n@{summary_cutoff}"), "train_s");
    for point in &result.points {
        let seen = point
            .mean_seen_ndcg(summary_cutoff)
            .map_or("-".to_string(), |v| format!("{v:.4}"));
        let unseen = point
            .mean_unseen_ndcg(summary_cutoff)
            .map_or("-".to_string(), |v| format!("{v:.4}"));
        println!(
            "{:>14} {:>14} {:>14} {:>12.2}",
            point.label,
            seen,
            unseen,
            point.mean_train_seconds()
        );
    }
    println!("table -> {}", table_path.display());
    Ok(())
}
