//! BPR optimization of the item embeddings: triple sampling, user-profile
//! dropout, convolution-aware gradients, Adam, early stopping.

mod adam;
mod batch;
mod checkpoint;
mod dropout;
mod loss;
mod sampler;

pub use adam::AdamState;
pub use batch::{batch_grad, batch_loss, BatchData};
pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint};
pub use dropout::apply_user_profile_dropout;
pub use loss::bpr_loss;
pub use sampler::{sample_triples, Triple};

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::InteractionMatrix;
use crate::error::{Error, Result};
use crate::eval::{evaluate_with_embeddings, MetricsReport, Protocol};
use crate::graph::{
    build_propagation_with, project_cosine, project_cosine_topk, propagate, PropagationMatrix,
};
use crate::model::{profile_weights, ItemEmbeddings, ModelConfig, TrainedModel};
use crate::train::sampler::TripleSampler;

/// Everything the optimizer needs beyond the model hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub model: ModelConfig,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
    /// Early stopping: epochs without validation improvement tolerated before
    /// stopping. `None` disables early stopping.
    pub patience: Option<usize>,
    /// Validation metric is NDCG at this cutoff.
    pub early_stop_cutoff: usize,
    /// Rescale dropout survivors by `1/(1-p)`.
    pub dropout_rescale: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            model: ModelConfig::default(),
            learning_rate: 0.01,
            batch_size: 1024,
            epochs: 100,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            seed: 42,
            patience: Some(10),
            early_stop_cutoff: 20,
            dropout_rescale: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.batch_size < 1 {
            return Err(Error::InvalidParam("batch_size must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidParam(format!(
                "learning_rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        if self.epochs < 1 {
            return Err(Error::InvalidParam("epochs must be >= 1".into()));
        }
        if self.early_stop_cutoff < 1 {
            return Err(Error::InvalidParam("early_stop_cutoff must be >= 1".into()));
        }
        Ok(())
    }
}

/// Glorot-uniform initialization: entries drawn from
/// `[-sqrt(6/(I+d)), +sqrt(6/(I+d))]` with a seeded generator.
pub fn init_embeddings(n_items: usize, dim: usize, seed: u64) -> ItemEmbeddings {
    use rand::Rng;
    assert!(n_items >= 1 && dim >= 1);
    let bound = (6.0 / (n_items + dim) as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ItemEmbeddings::from_fn(n_items, dim, |_, _| rng.gen_range(-bound..bound))
}

/// Loss and validation metrics for one epoch.
#[derive(Debug, Clone)]
pub struct EpochStats {
    pub epoch: usize,
    pub loss: f64,
    pub validation: Option<MetricsReport>,
}

#[derive(Debug, Clone, Default)]
pub struct TrainingHistory {
    pub epochs: Vec<EpochStats>,
    pub best_epoch: Option<usize>,
}

impl TrainingHistory {
    /// Delimiter-separated epoch log: `epoch, loss[, recall@N, ndcg@N ...]`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let cutoffs: Vec<usize> = self
            .epochs
            .first()
            .and_then(|e| e.validation.as_ref())
            .map(|r| r.cutoffs.clone())
            .unwrap_or_default();
        out.push_str("epoch\tloss");
        for n in &cutoffs {
            out.push_str(&format!("\tval_recall@{n}\tval_ndcg@{n}"));
        }
        out.push('\n');
        for e in &self.epochs {
            out.push_str(&format!("{}\t{:.6}", e.epoch, e.loss));
            if let Some(report) = &e.validation {
                for n in &cutoffs {
                    out.push_str(&format!(
                        "\t{:.6}\t{:.6}",
                        report.recall_at(*n).unwrap_or(f64::NAN),
                        report.ndcg_at(*n).unwrap_or(f64::NAN)
                    ));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Single logical writer over the embeddings and optimizer state. The graph,
/// its transpose and the profile table are fixed at construction.
pub struct Trainer<'a> {
    train: &'a InteractionMatrix,
    config: TrainConfig,
    prop: PropagationMatrix,
    prop_t: PropagationMatrix,
    profiles: Vec<Vec<(u32, f64)>>,
    x0: ItemEmbeddings,
    adam: AdamState,
    rng: ChaCha8Rng,
    epoch: usize,
}

impl<'a> Trainer<'a> {
    pub fn new(train: &'a InteractionMatrix, config: &TrainConfig) -> Result<Self> {
        config.validate()?;
        let graph = match config.model.top_k {
            Some(k) => project_cosine_topk(train, k)?,
            None => project_cosine(train)?,
        };
        let prop = build_propagation_with(&graph, &config.model.propagation);
        let prop_t = prop.transpose();
        let profiles: Vec<Vec<(u32, f64)>> = train
            .rows()
            .iter()
            .map(|row| profile_weights(row, config.model.weighting))
            .collect();
        let n_items = train.n_items();
        let x0 = init_embeddings(n_items, config.model.dim, config.seed);
        let adam = AdamState::new(
            n_items * config.model.dim,
            config.adam_beta1,
            config.adam_beta2,
            config.adam_eps,
        );
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(1);
        Ok(Trainer {
            train,
            config: config.clone(),
            prop,
            prop_t,
            profiles,
            x0,
            adam,
            rng,
            epoch: 0,
        })
    }

    pub fn embeddings(&self) -> &ItemEmbeddings {
        &self.x0
    }

    pub fn propagation(&self) -> &PropagationMatrix {
        &self.prop
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn adam(&self) -> &AdamState {
        &self.adam
    }

    /// The trainable state is exactly the item embedding matrix.
    pub fn n_parameters(&self) -> usize {
        self.adam.n_params()
    }

    /// One pass over `ceil(nnz/batch_size)` batches; returns the mean batch
    /// loss.
    pub fn train_epoch(&mut self) -> Result<f64> {
        self.epoch += 1;
        let nnz = self.train.nnz();
        let n_batches = nnz.div_ceil(self.config.batch_size).max(1);
        let sampler = TripleSampler::new(self.train);
        if !sampler.has_users() {
            return Err(Error::InvalidParam(
                "no sampleable users: every user is empty or holds the whole catalog".into(),
            ));
        }

        let mut total = 0.0;
        for b in 0..n_batches {
            let triples = sampler.sample_batch(self.config.batch_size, &mut self.rng);

            let mut users: Vec<u32> = triples.iter().map(|t| t.user).collect();
            users.sort_unstable();
            users.dedup();
            let raw: Vec<Vec<(u32, f64)>> = users
                .iter()
                .map(|&u| self.profiles[u as usize].clone())
                .collect();
            let masked = apply_user_profile_dropout(
                &raw,
                self.config.model.dropout_p,
                self.config.dropout_rescale,
                &mut self.rng,
            );
            let profiles: BTreeMap<u32, Vec<(u32, f64)>> =
                users.into_iter().zip(masked).collect();

            let batch = BatchData { triples, profiles };
            let (loss, grad) = batch_grad(
                &self.x0,
                &self.prop,
                &self.prop_t,
                self.config.model.depth,
                &batch,
                self.config.model.l2_reg,
            )?;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch: self.epoch,
                    batch: b,
                });
            }
            self.adam
                .update(self.x0.data_mut(), grad.data(), self.config.learning_rate);
            total += loss;
        }
        Ok(total / n_batches as f64)
    }

    fn validation_report(&self, val: &InteractionMatrix) -> Result<MetricsReport> {
        let convolved = propagate(&self.prop, &self.x0, self.config.model.depth)?;
        let profiles: Vec<&[u32]> = self.train.rows().iter().map(|r| r.as_slice()).collect();
        let relevant: Vec<&[u32]> = val.rows().iter().map(|r| r.as_slice()).collect();
        Ok(evaluate_with_embeddings(
            &convolved,
            self.config.model.weighting,
            &profiles,
            &relevant,
            &[self.config.early_stop_cutoff],
            Protocol::Transductive,
        ))
    }

    /// Snapshot the current parameters into a servable model.
    pub fn to_model(&self, item_map: crate::data::IdMap) -> Result<TrainedModel> {
        TrainedModel::new(
            self.x0.clone(),
            self.prop.clone(),
            self.config.model,
            item_map,
        )
    }
}

/// Train until the epoch budget or patience is exhausted, tracking validation
/// NDCG per epoch; returns the snapshot from the best validation epoch (the
/// final epoch when no validation split is given).
pub fn fit(
    train: &InteractionMatrix,
    val: Option<&InteractionMatrix>,
    config: &TrainConfig,
) -> Result<(TrainedModel, TrainingHistory)> {
    if let Some(v) = val {
        if v.n_items() != train.n_items() {
            return Err(Error::DimensionMismatch {
                what: "train vs validation item universe",
                expected: train.n_items(),
                got: v.n_items(),
            });
        }
    }

    let mut trainer = Trainer::new(train, config)?;
    let mut history = TrainingHistory::default();
    let mut best: Option<(usize, f64, ItemEmbeddings)> = None;
    let mut stale = 0usize;

    for epoch in 1..=config.epochs {
        let loss = trainer.train_epoch()?;
        let validation = match val {
            Some(v) => Some(trainer.validation_report(v)?),
            None => None,
        };

        if let Some(report) = &validation {
            let metric = report
                .ndcg_at(config.early_stop_cutoff)
                .expect("early-stop cutoff was evaluated");
            match &best {
                Some((_, best_metric, _)) if metric <= *best_metric => stale += 1,
                _ => {
                    best = Some((epoch, metric, trainer.embeddings().clone()));
                    stale = 0;
                }
            }
        }

        history.epochs.push(EpochStats {
            epoch,
            loss,
            validation,
        });

        if let (Some(patience), Some(_)) = (config.patience, val) {
            if stale > patience {
                break;
            }
        }
    }

    let x0 = match best {
        Some((epoch, _, snapshot)) => {
            history.best_epoch = Some(epoch);
            snapshot
        }
        None => {
            history.best_epoch = history.epochs.last().map(|e| e.epoch);
            trainer.embeddings().clone()
        }
    };

    let model = TrainedModel::new(
        x0,
        trainer.prop.clone(),
        config.model,
        train.item_map().clone(),
    )?;
    Ok((model, history))
}
