//! Inductive item-graph recommender engine.
//!
//! The pipeline: project the bipartite user-item interaction graph onto the
//! item set with cosine weights, prune each item's neighborhood to its top-K
//! strongest edges, convolve trainable item embeddings over the resulting
//! propagation matrix, and represent every user as the weighted sum of the
//! convolved embeddings of the items in their profile. Because users carry
//! no trained parameters, embeddings for users unseen at training time are
//! available immediately from their interactions, with no retraining.
//!
//! Modules follow the pipeline: [`data`] (ingestion, k-core, splits),
//! [`graph`] (projection, pruning, propagation), [`model`] (embeddings,
//! scoring, ranking), [`train`] (BPR with user-profile dropout and Adam),
//! [`eval`] (metrics, protocols, sweeps).

pub mod data;
pub mod error;
pub mod eval;
pub mod graph;
pub mod model;
pub mod train;

pub use error::{Error, Result};
