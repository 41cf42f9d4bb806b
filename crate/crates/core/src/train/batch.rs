//! Forward and backward passes for one BPR batch, written as pure functions
//! of the base embeddings so gradients can be checked against finite
//! differences.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::graph::{propagate, PropagationMatrix};
use crate::model::ItemEmbeddings;
use crate::train::loss::{bpr_loss, sigmoid};
use crate::train::Triple;

/// One batch: sampled triples plus the (dropout-masked, weighted) profile of
/// every user appearing in them. Ordered maps keep iteration deterministic.
#[derive(Debug, Clone)]
pub struct BatchData {
    pub triples: Vec<Triple>,
    pub profiles: BTreeMap<u32, Vec<(u32, f64)>>,
}

impl BatchData {
    /// Base-embedding rows the batch touches: positives, negatives, and all
    /// profile members. The regularizer runs over this set.
    pub fn touched_rows(&self) -> BTreeSet<u32> {
        let mut rows = BTreeSet::new();
        for t in &self.triples {
            rows.insert(t.pos);
            rows.insert(t.neg);
            if let Some(profile) = self.profiles.get(&t.user) {
                rows.extend(profile.iter().map(|&(i, _)| i));
            }
        }
        rows
    }
}

struct Forward {
    convolved: ItemEmbeddings,
    user_embeddings: BTreeMap<u32, Vec<f64>>,
    pos_scores: Vec<f64>,
    neg_scores: Vec<f64>,
}

fn forward(
    x0: &ItemEmbeddings,
    prop: &PropagationMatrix,
    depth: usize,
    batch: &BatchData,
) -> Result<Forward> {
    let convolved = propagate(prop, x0, depth)?;
    let dim = x0.dim();

    let mut user_embeddings = BTreeMap::new();
    for (&user, profile) in &batch.profiles {
        let mut v = vec![0.0; dim];
        for &(item, weight) in profile {
            for (acc, x) in v.iter_mut().zip(convolved.row(item)) {
                *acc += weight * x;
            }
        }
        user_embeddings.insert(user, v);
    }

    let mut pos_scores = Vec::with_capacity(batch.triples.len());
    let mut neg_scores = Vec::with_capacity(batch.triples.len());
    for t in &batch.triples {
        let xu = user_embeddings.get(&t.user).ok_or_else(|| {
            Error::InvalidParam(format!("triple references user {} without a profile", t.user))
        })?;
        pos_scores.push(dot(xu, convolved.row(t.pos)));
        neg_scores.push(dot(xu, convolved.row(t.neg)));
    }

    Ok(Forward {
        convolved,
        user_embeddings,
        pos_scores,
        neg_scores,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(acc: &mut [f64], a: f64, x: &[f64]) {
    for (o, v) in acc.iter_mut().zip(x) {
        *o += a * v;
    }
}

/// Batch loss as a pure function of the base embeddings.
pub fn batch_loss(
    x0: &ItemEmbeddings,
    prop: &PropagationMatrix,
    depth: usize,
    batch: &BatchData,
    l2_reg: f64,
) -> Result<f64> {
    let fwd = forward(x0, prop, depth, batch)?;
    let touched = batch.touched_rows();
    Ok(bpr_loss(
        &fwd.pos_scores,
        &fwd.neg_scores,
        touched.iter().map(|&r| x0.row(r)),
        l2_reg,
    ))
}

/// Batch loss plus its gradient with respect to the base embeddings.
///
/// The ranking gradient flows through both the profile sum and the
/// convolution: upstream gradients on `X^(k)` are pulled back through
/// `(P^T)^k`. The regularizer differentiates directly against touched
/// `X^(0)` rows.
pub fn batch_grad(
    x0: &ItemEmbeddings,
    prop: &PropagationMatrix,
    prop_t: &PropagationMatrix,
    depth: usize,
    batch: &BatchData,
    l2_reg: f64,
) -> Result<(f64, ItemEmbeddings)> {
    let fwd = forward(x0, prop, depth, batch)?;
    let touched = batch.touched_rows();
    let loss = bpr_loss(
        &fwd.pos_scores,
        &fwd.neg_scores,
        touched.iter().map(|&r| x0.row(r)),
        l2_reg,
    );

    let dim = x0.dim();
    let mut grad_convolved = ItemEmbeddings::zeros(x0.n_items(), dim);
    // Accumulated d(loss)/d(x_u) per batch user.
    let mut user_grads: BTreeMap<u32, Vec<f64>> =
        batch.profiles.keys().map(|&u| (u, vec![0.0; dim])).collect();

    for (idx, t) in batch.triples.iter().enumerate() {
        let g = sigmoid(fwd.pos_scores[idx] - fwd.neg_scores[idx]) - 1.0;
        let xu = &fwd.user_embeddings[&t.user];
        axpy(grad_convolved.row_mut(t.pos), g, xu);
        axpy(grad_convolved.row_mut(t.neg), -g, xu);

        let ug = user_grads.get_mut(&t.user).expect("user has a profile");
        for c in 0..dim {
            ug[c] += g * (fwd.convolved.row(t.pos)[c] - fwd.convolved.row(t.neg)[c]);
        }
    }

    // Scatter user gradients onto the convolved rows of their profiles.
    for (user, ug) in &user_grads {
        for &(item, weight) in &batch.profiles[user] {
            axpy(grad_convolved.row_mut(item), weight, ug);
        }
    }

    let mut grad = propagate(prop_t, &grad_convolved, depth)?;
    for &r in &touched {
        let row = x0.row(r).to_vec();
        axpy(grad.row_mut(r), 2.0 * l2_reg, &row);
    }

    Ok((loss, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ItemGraph;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_setup(
        n_items: usize,
        dim: usize,
        seed: u64,
    ) -> (ItemEmbeddings, PropagationMatrix, PropagationMatrix) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x0 = ItemEmbeddings::from_fn(n_items, dim, |_, _| rng.gen_range(-0.8..0.8));
        let mut edges = Vec::new();
        for i in 0..n_items as u32 {
            for j in 0..n_items as u32 {
                if i != j && rng.gen_bool(0.4) {
                    edges.push((i, j, rng.gen_range(0.05..1.0)));
                }
            }
        }
        let g = ItemGraph::from_edges(n_items, &edges, None).unwrap();
        let p = crate::graph::build_propagation(&g);
        let pt = p.transpose();
        (x0, p, pt)
    }

    fn random_batch(n_items: usize, n_triples: usize, seed: u64) -> BatchData {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut triples = Vec::new();
        let mut profiles = BTreeMap::new();
        for _ in 0..n_triples {
            let user = rng.gen_range(0..4u32);
            let pos = rng.gen_range(0..n_items as u32);
            let neg = loop {
                let c = rng.gen_range(0..n_items as u32);
                if c != pos {
                    break c;
                }
            };
            triples.push(Triple { user, pos, neg });
            profiles.entry(user).or_insert_with(|| {
                // Weighted profile with a mix of plain and dropout-rescaled weights.
                let len = rng.gen_range(1..=n_items.min(5));
                let mut items: Vec<u32> = (0..n_items as u32).collect();
                for i in (1..items.len()).rev() {
                    items.swap(i, rng.gen_range(0..=i));
                }
                items
                    .into_iter()
                    .take(len)
                    .map(|i| (i, if rng.gen_bool(0.5) { 1.0 } else { 1.6 }))
                    .collect()
            });
        }
        BatchData { triples, profiles }
    }

    /// Central finite differences over every base-embedding entry.
    fn finite_difference_grad(
        x0: &ItemEmbeddings,
        prop: &PropagationMatrix,
        depth: usize,
        batch: &BatchData,
        l2: f64,
        h: f64,
    ) -> ItemEmbeddings {
        let n = x0.n_items();
        let d = x0.dim();
        let mut grad = ItemEmbeddings::zeros(n, d);
        for i in 0..n as u32 {
            for c in 0..d {
                let mut plus = x0.clone();
                plus.row_mut(i)[c] += h;
                let mut minus = x0.clone();
                minus.row_mut(i)[c] -= h;
                let lp = batch_loss(&plus, prop, depth, batch, l2).unwrap();
                let lm = batch_loss(&minus, prop, depth, batch, l2).unwrap();
                grad.row_mut(i)[c] = (lp - lm) / (2.0 * h);
            }
        }
        grad
    }

    fn assert_grad_close(analytic: &ItemEmbeddings, numeric: &ItemEmbeddings, context: &str) {
        for (idx, (a, n)) in analytic.data().iter().zip(numeric.data()).enumerate() {
            let denom = a.abs().max(n.abs()).max(1e-8);
            let rel = (a - n).abs() / denom;
            assert!(
                rel < 1e-5,
                "{context}: entry {idx}: analytic {a:.10e} vs numeric {n:.10e} (rel {rel:.2e})"
            );
        }
    }

    #[test]
    fn gradient_matches_finite_differences_across_depths() {
        for depth in 0..=2usize {
            for seed in 0..3u64 {
                let (x0, p, pt) = random_setup(7, 3, seed * 10 + depth as u64);
                let batch = random_batch(7, 5, seed * 31 + depth as u64);
                let l2 = if seed % 2 == 0 { 0.0 } else { 0.01 };
                let (_, analytic) = batch_grad(&x0, &p, &pt, depth, &batch, l2).unwrap();
                let numeric = finite_difference_grad(&x0, &p, depth, &batch, l2, 1e-4);
                assert_grad_close(&analytic, &numeric, &format!("depth={depth} seed={seed}"));
            }
        }
    }

    #[test]
    fn single_triple_three_item_toy_gradient() {
        let (x0, p, pt) = random_setup(3, 2, 99);
        let mut profiles = BTreeMap::new();
        profiles.insert(0u32, vec![(0u32, 1.0), (2, 1.0)]);
        let batch = BatchData {
            triples: vec![Triple {
                user: 0,
                pos: 0,
                neg: 1,
            }],
            profiles,
        };
        let (_, analytic) = batch_grad(&x0, &p, &pt, 1, &batch, 0.0).unwrap();
        let numeric = finite_difference_grad(&x0, &p, 1, &batch, 0.0, 1e-4);
        assert_grad_close(&analytic, &numeric, "single-triple toy");
    }

    #[test]
    fn loss_value_agrees_between_loss_and_grad_paths() {
        let (x0, p, pt) = random_setup(6, 3, 5);
        let batch = random_batch(6, 8, 6);
        let loss_only = batch_loss(&x0, &p, 2, &batch, 0.02).unwrap();
        let (loss_with_grad, _) = batch_grad(&x0, &p, &pt, 2, &batch, 0.02).unwrap();
        assert_eq!(loss_only, loss_with_grad);
    }

    #[test]
    fn missing_profile_is_an_error() {
        let (x0, p, _) = random_setup(4, 2, 7);
        let batch = BatchData {
            triples: vec![Triple {
                user: 9,
                pos: 0,
                neg: 1,
            }],
            profiles: BTreeMap::new(),
        };
        assert!(batch_loss(&x0, &p, 1, &batch, 0.0).is_err());
    }
}
