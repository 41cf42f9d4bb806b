//! Declarative run configuration: a TOML file with sections, validated with
//! field-level messages. Every CLI flag overrides its config key.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use itemgraph::model::{ModelConfig, ProfileWeighting};
use itemgraph::train::TrainConfig;

use crate::error::{usage, CliResult};

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub split: SplitSection,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub eval: EvalSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub path: Option<PathBuf>,
    pub delimiter: Option<String>,
    pub positive_threshold: Option<f64>,
    #[serde(default)]
    pub skip_lines: usize,
    #[serde(default = "default_k_core")]
    pub k_core: usize,
}

impl Default for DataSection {
    fn default() -> Self {
        toml::from_str("").expect("empty data section has defaults")
    }
}

fn default_k_core() -> usize {
    10
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSection {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_train_frac")]
    pub train_frac: f64,
    #[serde(default = "default_val_frac")]
    pub val_frac: f64,
    #[serde(default = "default_unseen_frac")]
    pub unseen_frac: f64,
    #[serde(default = "default_profile_build_frac")]
    pub profile_build_frac: f64,
    /// Which split artifacts `prepare` writes: transductive, inductive, both.
    #[serde(default)]
    pub protocol: ProtocolChoice,
}

impl Default for SplitSection {
    fn default() -> Self {
        toml::from_str("").expect("empty split section has defaults")
    }
}

fn default_seed() -> u64 {
    42
}
fn default_train_frac() -> f64 {
    0.8
}
fn default_val_frac() -> f64 {
    0.1
}
fn default_unseen_frac() -> f64 {
    0.1
}
fn default_profile_build_frac() -> f64 {
    0.9
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolChoice {
    Transductive,
    Inductive,
    #[default]
    Both,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_depth")]
    pub depth: usize,
    /// Neighbors kept per item; 0 means the unpruned graph.
    #[serde(default = "default_top_k")]
    pub top_k: usize,
    #[serde(default = "default_dropout")]
    pub dropout_p: f64,
    #[serde(default = "default_l2")]
    pub l2_reg: f64,
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    /// Early-stop patience in epochs; absent disables early stopping.
    pub patience: Option<usize>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_true")]
    pub self_loops: bool,
    #[serde(default)]
    pub row_normalize: bool,
    #[serde(default)]
    pub mean_profile: bool,
    #[serde(default = "default_true")]
    pub dropout_rescale: bool,
    #[serde(default = "default_cutoff")]
    pub early_stop_cutoff: usize,
    #[serde(default = "default_beta1")]
    pub adam_beta1: f64,
    #[serde(default = "default_beta2")]
    pub adam_beta2: f64,
    #[serde(default = "default_eps")]
    pub adam_eps: f64,
}

impl Default for TrainSection {
    fn default() -> Self {
        toml::from_str("").expect("empty train section has defaults")
    }
}

fn default_dim() -> usize {
    64
}
fn default_depth() -> usize {
    2
}
fn default_top_k() -> usize {
    20
}
fn default_dropout() -> f64 {
    0.3
}
fn default_l2() -> f64 {
    1e-6
}
fn default_lr() -> f64 {
    0.01
}
fn default_batch() -> usize {
    1024
}
fn default_epochs() -> usize {
    100
}
fn default_true() -> bool {
    true
}
fn default_cutoff() -> usize {
    20
}
fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}
fn default_eps() -> f64 {
    1e-8
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSection {
    #[serde(default = "default_cutoffs")]
    pub cutoffs: Vec<usize>,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection {
            cutoffs: default_cutoffs(),
        }
    }
}

fn default_cutoffs() -> Vec<usize> {
    vec![5, 20]
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> CliResult<RunConfig> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| usage(format!("bad config {}: {e}", path.display())))
    }

    /// Field-level validation; called after CLI overrides are applied.
    pub fn validate(&self) -> CliResult<()> {
        let s = &self.split;
        if !(s.train_frac > 0.0 && s.val_frac > 0.0 && s.train_frac + s.val_frac < 1.0) {
            return Err(usage(format!(
                "split.train_frac + split.val_frac must stay below 1 with both positive (got {} and {})",
                s.train_frac, s.val_frac
            )));
        }
        if !(s.unseen_frac > 0.0 && s.unseen_frac < 1.0) {
            return Err(usage(format!(
                "split.unseen_frac must be in (0,1), got {}",
                s.unseen_frac
            )));
        }
        if !(s.profile_build_frac > 0.0 && s.profile_build_frac < 1.0) {
            return Err(usage(format!(
                "split.profile_build_frac must be in (0,1), got {}",
                s.profile_build_frac
            )));
        }
        if self.data.k_core < 1 {
            return Err(usage("data.k_core must be >= 1".to_string()));
        }
        if self.eval.cutoffs.is_empty() || self.eval.cutoffs.iter().any(|&n| n == 0) {
            return Err(usage("eval.cutoffs must be non-empty positive integers".to_string()));
        }
        // Train-section errors reuse the library's validation messages.
        self.train_config().validate().map_err(|e| usage(e.to_string()))?;
        Ok(())
    }

    pub fn train_config(&self) -> TrainConfig {
        let t = &self.train;
        TrainConfig {
            model: ModelConfig {
                dim: t.dim,
                depth: t.depth,
                top_k: if t.top_k == 0 { None } else { Some(t.top_k) },
                dropout_p: t.dropout_p,
                l2_reg: t.l2_reg,
                propagation: itemgraph::graph::PropagationOptions {
                    self_loops: t.self_loops,
                    row_normalize: t.row_normalize,
                },
                weighting: if t.mean_profile {
                    ProfileWeighting::MeanOfProfile
                } else {
                    ProfileWeighting::Uniform
                },
            },
            learning_rate: t.learning_rate,
            batch_size: t.batch_size,
            epochs: t.epochs,
            adam_beta1: t.adam_beta1,
            adam_beta2: t.adam_beta2,
            adam_eps: t.adam_eps,
            seed: t.seed,
            patience: t.patience,
            early_stop_cutoff: t.early_stop_cutoff,
            dropout_rescale: t.dropout_rescale,
        }
    }

    pub fn output_dir(&self) -> CliResult<&Path> {
        self.output
            .dir
            .as_deref()
            .ok_or_else(|| usage("output.dir is required (set it in the config or pass --out)".into()))
    }
}
