//! Run manifest written by `prepare`: dataset provenance, counts, the item
//! universe hash, and the seeds and fractions behind each split artifact.
//! Rerunning `prepare` with the same config reproduces it byte for byte.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{runtime, CliResult};

pub const MANIFEST_FILE: &str = "manifest.toml";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub dataset: DatasetInfo,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transductive: Option<SplitInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inductive: Option<HoldoutInfo>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub source: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub positive_threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delimiter: Option<String>,
    pub skip_lines: usize,
    pub k_core: usize,
    pub n_users: usize,
    pub n_items: usize,
    pub n_interactions: usize,
    pub universe_hash: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitInfo {
    pub dir: String,
    pub seed: u64,
    pub train_frac: f64,
    pub val_frac: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HoldoutInfo {
    pub dir: String,
    pub seed: u64,
    pub unseen_frac: f64,
    pub profile_build_frac: f64,
}

impl Manifest {
    pub fn write(&self, run_dir: &Path) -> CliResult<()> {
        let text = toml::to_string_pretty(self)
            .map_err(|e| runtime(format!("cannot serialize manifest: {e}")))?;
        std::fs::write(run_dir.join(MANIFEST_FILE), text)
            .map_err(|e| runtime(format!("cannot write manifest: {e}")))?;
        Ok(())
    }
}
