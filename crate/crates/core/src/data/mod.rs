//! Dataset ingestion, k-core filtering and reproducible splitting.

mod ingest;
mod kcore;
mod matrix;
mod split;

pub mod artifacts;

pub use ingest::{load_interactions, write_interactions, LoadOptions};
pub use kcore::kcore_filter;
pub use matrix::{build_matrix, universe_hash, IdMap, InteractionMatrix, InteractionRecord};
pub use split::{split_per_user, split_user_holdout, DatasetSplit, UserHoldoutSplit};
