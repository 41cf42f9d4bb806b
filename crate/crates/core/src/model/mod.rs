//! Item embeddings, profile-derived user embeddings, scoring and ranking.

mod file;

pub use file::{read_model, write_model};

use std::sync::OnceLock;

use crate::data::IdMap;
use crate::error::{Error, Result};
use crate::graph::{propagate, PropagationMatrix, PropagationOptions};

/// Dense row-major embedding matrix. Rows are items for `X^(0)` / `X^(k)`;
/// [`embed_all_users`] reuses the same layout with one row per user.
#[derive(Debug, Clone, PartialEq)]
pub struct ItemEmbeddings {
    n_items: usize,
    dim: usize,
    data: Vec<f64>,
}

impl ItemEmbeddings {
    pub fn zeros(n_items: usize, dim: usize) -> Self {
        ItemEmbeddings {
            n_items,
            dim,
            data: vec![0.0; n_items * dim],
        }
    }

    pub fn from_fn(n_items: usize, dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n_items * dim);
        for i in 0..n_items {
            for c in 0..dim {
                data.push(f(i, c));
            }
        }
        ItemEmbeddings { n_items, dim, data }
    }

    pub fn from_vec(n_items: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n_items * dim {
            return Err(Error::DimensionMismatch {
                what: "embedding data",
                expected: n_items * dim,
                got: data.len(),
            });
        }
        Ok(ItemEmbeddings { n_items, dim, data })
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: u32) -> &[f64] {
        let start = i as usize * self.dim;
        &self.data[start..start + self.dim]
    }

    pub fn row_mut(&mut self, i: u32) -> &mut [f64] {
        let start = i as usize * self.dim;
        &mut self.data[start..start + self.dim]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// A user's position in the item embedding space plus how much profile
/// evidence produced it; `source_profile_size == 0` flags a cold (zero)
/// embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct UserEmbedding {
    pub vector: Vec<f64>,
    pub source_profile_size: usize,
}

impl UserEmbedding {
    pub fn is_cold(&self) -> bool {
        self.source_profile_size == 0
    }
}

/// Per-interaction weight scheme for building user embeddings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProfileWeighting {
    /// All interactions weigh 1 (plain sum).
    #[default]
    Uniform,
    /// Each interaction weighs `1/|profile|`.
    MeanOfProfile,
}

/// Attach weights to a profile's item indices.
pub fn profile_weights(items: &[u32], weighting: ProfileWeighting) -> Vec<(u32, f64)> {
    let w = match weighting {
        ProfileWeighting::Uniform => 1.0,
        ProfileWeighting::MeanOfProfile => {
            if items.is_empty() {
                1.0
            } else {
                1.0 / items.len() as f64
            }
        }
    };
    items.iter().map(|&i| (i, w)).collect()
}

/// `x_u = sum_i lambda_ui x_i` over the profile. An empty profile yields the
/// zero vector, flagged through `source_profile_size`.
pub fn embed_user(profile: &[(u32, f64)], x: &ItemEmbeddings) -> Result<UserEmbedding> {
    let mut vector = vec![0.0; x.dim()];
    for &(item, weight) in profile {
        if item as usize >= x.n_items() {
            return Err(Error::ItemIndexOutOfRange {
                index: item as usize,
                n_items: x.n_items(),
            });
        }
        for (acc, v) in vector.iter_mut().zip(x.row(item)) {
            *acc += weight * v;
        }
    }
    if profile.is_empty() {
        log::warn!("embedding a user with an empty profile; scores will be zero");
    }
    Ok(UserEmbedding {
        vector,
        source_profile_size: profile.len(),
    })
}

/// Matrix form `U = R~ X`: one embedding row per user profile.
pub fn embed_all_users(profiles: &[Vec<(u32, f64)>], x: &ItemEmbeddings) -> Result<ItemEmbeddings> {
    let dim = x.dim();
    let mut out = ItemEmbeddings::zeros(profiles.len(), dim);
    for (u, profile) in profiles.iter().enumerate() {
        for &(item, weight) in profile {
            if item as usize >= x.n_items() {
                return Err(Error::ItemIndexOutOfRange {
                    index: item as usize,
                    n_items: x.n_items(),
                });
            }
            let row = out.row_mut(u as u32);
            for (acc, v) in row.iter_mut().zip(x.row(item)) {
                *acc += weight * v;
            }
        }
    }
    Ok(out)
}

/// Preference score: dot product of user and item embeddings.
pub fn score(user: &[f64], item: &[f64]) -> f64 {
    assert_eq!(user.len(), item.len(), "score requires equal dimensions");
    user.iter().zip(item).map(|(u, v)| u * v).sum()
}

/// Model hyperparameters persisted alongside the embeddings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig {
    pub dim: usize,
    pub depth: usize,
    pub top_k: Option<usize>,
    pub dropout_p: f64,
    pub l2_reg: f64,
    pub propagation: PropagationOptions,
    pub weighting: ProfileWeighting,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            dim: 64,
            depth: 2,
            top_k: Some(20),
            dropout_p: 0.3,
            l2_reg: 1e-6,
            propagation: PropagationOptions::default(),
            weighting: ProfileWeighting::Uniform,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidParam("embedding dim must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.dropout_p) {
            return Err(Error::InvalidParam(format!(
                "dropout_p must be in [0,1), got {}",
                self.dropout_p
            )));
        }
        if self.l2_reg < 0.0 {
            return Err(Error::InvalidParam("l2_reg must be >= 0".into()));
        }
        if self.top_k == Some(0) {
            return Err(Error::InvalidParam("top_k must be >= 1 when set".into()));
        }
        Ok(())
    }
}

/// Everything needed to serve recommendations, including for users unseen at
/// training time: base item embeddings, the propagation matrix and the item
/// key table. Convolved embeddings are derived on first use and cached.
#[derive(Debug)]
pub struct TrainedModel {
    item_embeddings: ItemEmbeddings,
    propagation: PropagationMatrix,
    config: ModelConfig,
    item_map: IdMap,
    convolved: OnceLock<ItemEmbeddings>,
}

impl TrainedModel {
    pub fn new(
        item_embeddings: ItemEmbeddings,
        propagation: PropagationMatrix,
        config: ModelConfig,
        item_map: IdMap,
    ) -> Result<Self> {
        config.validate()?;
        if item_embeddings.n_items() != propagation.n_items() {
            return Err(Error::DimensionMismatch {
                what: "model embeddings vs propagation",
                expected: propagation.n_items(),
                got: item_embeddings.n_items(),
            });
        }
        if item_embeddings.n_items() != item_map.len() {
            return Err(Error::DimensionMismatch {
                what: "model embeddings vs item map",
                expected: item_map.len(),
                got: item_embeddings.n_items(),
            });
        }
        if item_embeddings.dim() != config.dim {
            return Err(Error::DimensionMismatch {
                what: "model embeddings vs config dim",
                expected: config.dim,
                got: item_embeddings.dim(),
            });
        }
        Ok(TrainedModel {
            item_embeddings,
            propagation,
            config,
            item_map,
            convolved: OnceLock::new(),
        })
    }

    pub fn n_items(&self) -> usize {
        self.item_embeddings.n_items()
    }

    pub fn raw_embeddings(&self) -> &ItemEmbeddings {
        &self.item_embeddings
    }

    pub fn propagation(&self) -> &PropagationMatrix {
        &self.propagation
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn item_map(&self) -> &IdMap {
        &self.item_map
    }

    /// `X^(k) = P^k X^(0)`, computed once and cached.
    pub fn convolved_items(&self) -> &ItemEmbeddings {
        self.convolved.get_or_init(|| {
            propagate(&self.propagation, &self.item_embeddings, self.config.depth)
                .expect("model dimensions were validated on construction")
        })
    }

    /// Embed a profile given as item indices using the model's weighting.
    pub fn user_embedding(&self, profile_items: &[u32]) -> Result<UserEmbedding> {
        let weighted = profile_weights(profile_items, self.config.weighting);
        embed_user(&weighted, self.convolved_items())
    }

    /// Score every item for the given profile and return the top `n` as
    /// `(item index, score)`, ties broken toward the lower index.
    pub fn recommend(
        &self,
        profile_items: &[u32],
        n: usize,
        exclude_profile: bool,
    ) -> Result<Vec<(u32, f64)>> {
        assert!(n >= 1, "recommend requires n >= 1");
        let user = self.user_embedding(profile_items)?;
        let exclude: Vec<u32> = if exclude_profile {
            let mut ex = profile_items.to_vec();
            ex.sort_unstable();
            ex.dedup();
            ex
        } else {
            Vec::new()
        };
        let x = self.convolved_items();
        let scores: Vec<f64> = (0..self.n_items() as u32)
            .map(|i| score(&user.vector, x.row(i)))
            .collect();
        Ok(rank_top_n(&scores, &exclude, n))
    }
}

/// Top-`n` candidate indices by score (descending, ties toward lower index),
/// skipping the sorted `exclude` list.
pub fn rank_top_n(scores: &[f64], exclude: &[u32], n: usize) -> Vec<(u32, f64)> {
    debug_assert!(exclude.windows(2).all(|w| w[0] < w[1]));
    let mut candidates: Vec<(u32, f64)> = (0..scores.len() as u32)
        .filter(|i| exclude.binary_search(i).is_err())
        .map(|i| (i, scores[i as usize]))
        .collect();
    let cmp = |a: &(u32, f64), b: &(u32, f64)| {
        b.1.partial_cmp(&a.1)
            .expect("scores are finite")
            .then(a.0.cmp(&b.0))
    };
    if candidates.len() > n {
        candidates.select_nth_unstable_by(n - 1, cmp);
        candidates.truncate(n);
    }
    candidates.sort_unstable_by(cmp);
    candidates
}
