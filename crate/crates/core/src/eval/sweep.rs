use std::time::Instant;

use crate::data::{split_per_user, split_user_holdout, InteractionMatrix};
use crate::error::{Error, Result};
use crate::eval::{evaluate_inductive, evaluate_transductive, MetricsReport};
use crate::train::{fit, TrainConfig};

// Inner split fractions used by every sweep run, matching the evaluation
// protocols: per-user 80/10/10, unseen profiles built from 90%.
const TRAIN_FRAC: f64 = 0.8;
const VAL_FRAC: f64 = 0.1;
const PROFILE_BUILD_FRAC: f64 = 0.9;

/// Which hyperparameter a sweep varies, together with its grid.
#[derive(Debug, Clone)]
pub enum SweepGrid {
    Depth(Vec<usize>),
    DropoutP(Vec<f64>),
    /// `None` means the unpruned graph.
    TopK(Vec<Option<usize>>),
    /// Fraction of users kept as seen training users; the rest are held out
    /// for inductive evaluation.
    TrainUserFraction(Vec<f64>),
}

impl SweepGrid {
    pub fn parameter_name(&self) -> &'static str {
        match self {
            SweepGrid::Depth(_) => "depth",
            SweepGrid::DropoutP(_) => "dropout_p",
            SweepGrid::TopK(_) => "top_k",
            SweepGrid::TrainUserFraction(_) => "train_user_fraction",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            SweepGrid::Depth(g) => g.len(),
            SweepGrid::DropoutP(g) => g.len(),
            SweepGrid::TopK(g) => g.len(),
            SweepGrid::TrainUserFraction(g) => g.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn label(&self, idx: usize) -> String {
        match self {
            SweepGrid::Depth(g) => g[idx].to_string(),
            SweepGrid::DropoutP(g) => g[idx].to_string(),
            SweepGrid::TopK(g) => g[idx].map_or_else(|| "full".to_string(), |k| k.to_string()),
            SweepGrid::TrainUserFraction(g) => g[idx].to_string(),
        }
    }
}

/// One trained-and-evaluated run at a grid point.
#[derive(Debug, Clone)]
pub struct SweepRun {
    pub seed: u64,
    pub seen: MetricsReport,
    pub unseen: Option<MetricsReport>,
    pub train_seconds: f64,
}

/// All runs (one per seed) at a single grid value.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub label: String,
    pub runs: Vec<SweepRun>,
}

impl SweepPoint {
    pub fn mean_seen_ndcg(&self, cutoff: usize) -> Option<f64> {
        mean(self.runs.iter().filter_map(|r| r.seen.ndcg_at(cutoff)))
    }

    pub fn mean_unseen_ndcg(&self, cutoff: usize) -> Option<f64> {
        mean(
            self.runs
                .iter()
                .filter_map(|r| r.unseen.as_ref().and_then(|u| u.ndcg_at(cutoff))),
        )
    }

    pub fn mean_train_seconds(&self) -> f64 {
        mean(self.runs.iter().map(|r| r.train_seconds)).unwrap_or(0.0)
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let collected: Vec<f64> = values.collect();
    if collected.is_empty() {
        None
    } else {
        Some(collected.iter().sum::<f64>() / collected.len() as f64)
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub parameter: String,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    /// Plot-ready long format:
    /// `parameter value seed group metric score train_seconds` per line.
    pub fn long_format_tsv(&self) -> String {
        let mut out = String::from("parameter\tvalue\tseed\tgroup\tmetric\tscore\ttrain_seconds\n");
        for point in &self.points {
            for run in &point.runs {
                let mut emit = |group: &str, report: &MetricsReport| {
                    for (i, n) in report.cutoffs.iter().enumerate() {
                        out.push_str(&format!(
                            "{}\t{}\t{}\t{}\trecall@{}\t{:.6}\t{:.3}\n",
                            self.parameter, point.label, run.seed, group, n, report.recall[i], run.train_seconds,
                        ));
                        out.push_str(&format!(
                            "{}\t{}\t{}\t{}\tndcg@{}\t{:.6}\t{:.3}\n",
                            self.parameter, point.label, run.seed, group, n, report.ndcg[i], run.train_seconds,
                        ));
                    }
                };
                emit("seen", &run.seen);
                if let Some(unseen) = &run.unseen {
                    emit("unseen", unseen);
                }
            }
        }
        out
    }
}

/// Train one model per grid value per seed and evaluate it under the protocol
/// the swept parameter implies. Hyperparameter sweeps use the per-user split
/// and transductive evaluation; the training-fraction sweep additionally
/// holds out users and reports seen and unseen metrics side by side.
pub fn run_sweep(
    grid: &SweepGrid,
    base: &TrainConfig,
    matrix: &InteractionMatrix,
    seeds: &[u64],
    cutoffs: &[usize],
) -> Result<SweepResult> {
    if grid.is_empty() {
        return Err(Error::InvalidParam("sweep grid is empty".into()));
    }
    if seeds.is_empty() {
        return Err(Error::InvalidParam("sweep needs at least one seed".into()));
    }

    let mut points = Vec::with_capacity(grid.len());
    for idx in 0..grid.len() {
        let mut runs = Vec::with_capacity(seeds.len());
        for &seed in seeds {
            let run = match grid {
                SweepGrid::Depth(g) => {
                    let mut config = base.clone();
                    config.model.depth = g[idx];
                    hyper_run(matrix, &config, seed, cutoffs)?
                }
                SweepGrid::DropoutP(g) => {
                    let mut config = base.clone();
                    config.model.dropout_p = g[idx];
                    hyper_run(matrix, &config, seed, cutoffs)?
                }
                SweepGrid::TopK(g) => {
                    let mut config = base.clone();
                    config.model.top_k = g[idx];
                    hyper_run(matrix, &config, seed, cutoffs)?
                }
                SweepGrid::TrainUserFraction(g) => {
                    fraction_run(matrix, base, g[idx], seed, cutoffs)?
                }
            };
            runs.push(run);
        }
        points.push(SweepPoint {
            label: grid.label(idx),
            runs,
        });
    }

    Ok(SweepResult {
        parameter: grid.parameter_name().to_string(),
        points,
    })
}

fn hyper_run(
    matrix: &InteractionMatrix,
    config: &TrainConfig,
    seed: u64,
    cutoffs: &[usize],
) -> Result<SweepRun> {
    let mut config = config.clone();
    config.seed = seed;
    let split = split_per_user(matrix, TRAIN_FRAC, VAL_FRAC, seed)?;
    let start = Instant::now();
    let (model, _) = fit(&split.train, Some(&split.validation), &config)?;
    let train_seconds = start.elapsed().as_secs_f64();
    let seen = evaluate_transductive(&model, &split, cutoffs)?;
    Ok(SweepRun {
        seed,
        seen,
        unseen: None,
        train_seconds,
    })
}

fn fraction_run(
    matrix: &InteractionMatrix,
    base: &TrainConfig,
    seen_fraction: f64,
    seed: u64,
    cutoffs: &[usize],
) -> Result<SweepRun> {
    if !(seen_fraction > 0.0 && seen_fraction < 1.0) {
        return Err(Error::InvalidParam(format!(
            "train_user_fraction must be in (0,1), got {seen_fraction}"
        )));
    }
    let mut config = base.clone();
    config.seed = seed;
    let holdout = split_user_holdout(matrix, 1.0 - seen_fraction, PROFILE_BUILD_FRAC, seed)?;
    let seen_split = split_per_user(&holdout.train_users, TRAIN_FRAC, VAL_FRAC, seed)?;
    let start = Instant::now();
    let (model, _) = fit(&seen_split.train, Some(&seen_split.validation), &config)?;
    let train_seconds = start.elapsed().as_secs_f64();
    let seen = evaluate_transductive(&model, &seen_split, cutoffs)?;
    let unseen = evaluate_inductive(&model, &holdout, cutoffs)?;
    Ok(SweepRun {
        seed,
        seen,
        unseen: Some(unseen),
        train_seconds,
    })
}
