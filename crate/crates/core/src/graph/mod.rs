//! One-mode projection of the interaction graph onto items, top-K pruning,
//! and linear propagation of embeddings.

mod propagation;

pub use propagation::{build_propagation, build_propagation_with, propagate, PropagationMatrix, PropagationOptions};

use rayon::prelude::*;

use crate::data::InteractionMatrix;
use crate::error::{Error, Result};

/// Weighted item-item graph. Rows hold `(neighbor, weight)` pairs sorted by
/// neighbor index, with no diagonal entries and no explicit zero weights.
/// Before pruning the graph is symmetric; after [`topk_prune`] rows are read
/// as "item i aggregates from these neighbors".
#[derive(Debug, Clone, PartialEq)]
pub struct ItemGraph {
    n_items: usize,
    rows: Vec<Vec<(u32, f64)>>,
    pruned_k: Option<usize>,
}

impl ItemGraph {
    pub(crate) fn from_rows(rows: Vec<Vec<(u32, f64)>>, pruned_k: Option<usize>) -> Self {
        ItemGraph {
            n_items: rows.len(),
            rows,
            pruned_k,
        }
    }

    /// Build from coordinate triples; used when reading persisted graphs.
    pub fn from_edges(n_items: usize, edges: &[(u32, u32, f64)], pruned_k: Option<usize>) -> Result<Self> {
        let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n_items];
        for &(i, j, w) in edges {
            if i as usize >= n_items || j as usize >= n_items {
                return Err(Error::ItemIndexOutOfRange {
                    index: i.max(j) as usize,
                    n_items,
                });
            }
            if i == j {
                return Err(Error::InvalidParam("diagonal edge in item graph".into()));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidParam(format!("bad edge weight {w}")));
            }
            if w > 0.0 {
                rows[i as usize].push((j, w));
            }
        }
        for row in &mut rows {
            row.sort_unstable_by_key(|&(j, _)| j);
        }
        Ok(ItemGraph::from_rows(rows, pruned_k))
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn row(&self, item: u32) -> &[(u32, f64)] {
        &self.rows[item as usize]
    }

    pub fn pruned_k(&self) -> Option<usize> {
        self.pruned_k
    }

    pub fn n_edges(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn weight(&self, i: u32, j: u32) -> f64 {
        self.rows[i as usize]
            .binary_search_by_key(&j, |&(n, _)| n)
            .map(|pos| self.rows[i as usize][pos].1)
            .unwrap_or(0.0)
    }

    /// All edges as coordinate triples, row-major.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&(j, w)| (i as u32, j, w)))
    }
}

/// Cosine similarity of binary item columns: `|N_i ∩ N_j| / sqrt(|N_i| |N_j|)`.
/// Item pairs with no common user get no edge.
pub fn project_cosine(matrix: &InteractionMatrix) -> Result<ItemGraph> {
    project_rows(matrix, None).map(|rows| ItemGraph::from_rows(rows, None))
}

/// Projection fused with per-item top-K selection, avoiding materialization
/// of the full similarity matrix. Equivalent to `topk_prune(project_cosine(R), k)`.
pub fn project_cosine_topk(matrix: &InteractionMatrix, k: usize) -> Result<ItemGraph> {
    assert!(k >= 1, "top-K pruning requires K >= 1");
    project_rows(matrix, Some(k)).map(|rows| ItemGraph::from_rows(rows, Some(k)))
}

fn project_rows(matrix: &InteractionMatrix, k: Option<usize>) -> Result<Vec<Vec<(u32, f64)>>> {
    let n_items = matrix.n_items();
    let cols = matrix.columns();
    for (i, col) in cols.iter().enumerate() {
        if col.is_empty() {
            return Err(Error::InvalidParam(format!(
                "item {} ({}) has no interactions; projection needs non-empty columns",
                i,
                matrix.item_map().key(i as u32)
            )));
        }
    }

    let degrees: Vec<usize> = cols.iter().map(Vec::len).collect();

    let rows: Vec<Vec<(u32, f64)>> = (0..n_items)
        .into_par_iter()
        .map(|i| {
            let mut counts = vec![0u32; n_items];
            let mut touched: Vec<u32> = Vec::new();
            for &u in &cols[i] {
                for &j in matrix.row(u) {
                    if j as usize != i {
                        if counts[j as usize] == 0 {
                            touched.push(j);
                        }
                        counts[j as usize] += 1;
                    }
                }
            }
            let mut row: Vec<(u32, f64)> = touched
                .iter()
                .map(|&j| {
                    let denom = ((degrees[i] as f64) * (degrees[j as usize] as f64)).sqrt();
                    (j, counts[j as usize] as f64 / denom)
                })
                .collect();
            if let Some(k) = k {
                select_topk(&mut row, k);
            }
            row.sort_unstable_by_key(|&(j, _)| j);
            row
        })
        .collect();

    Ok(rows)
}

/// Keep, per item, the K incident edges with the highest weight; ties break
/// toward the lower neighbor index. Nodes with degree <= K are untouched.
pub fn topk_prune(graph: &ItemGraph, k: usize) -> ItemGraph {
    assert!(k >= 1, "top-K pruning requires K >= 1");
    let rows = graph
        .rows
        .iter()
        .map(|row| {
            let mut row = row.clone();
            select_topk(&mut row, k);
            row.sort_unstable_by_key(|&(j, _)| j);
            row
        })
        .collect();
    ItemGraph::from_rows(rows, Some(k))
}

fn select_topk(row: &mut Vec<(u32, f64)>, k: usize) {
    if row.len() <= k {
        return;
    }
    row.sort_unstable_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("edge weights are finite")
            .then(a.0.cmp(&b.0))
    });
    row.truncate(k);
}
