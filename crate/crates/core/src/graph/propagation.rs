use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::ItemGraph;
use crate::model::ItemEmbeddings;

/// How the aggregation matrix is assembled from the pruned item graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationOptions {
    /// Add a unit self-loop to every row so an item's own embedding persists
    /// through convolution.
    pub self_loops: bool,
    /// Divide each row by its weight sum (off by default: raw cosine weights).
    pub row_normalize: bool,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        PropagationOptions {
            self_loops: true,
            row_normalize: false,
        }
    }
}

/// Sparse row-wise aggregation matrix: row i lists the neighbors item i
/// aggregates from, plus its self-loop when configured.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationMatrix {
    n_items: usize,
    rows: Vec<Vec<(u32, f64)>>,
}

/// `P = W + I` with default options.
pub fn build_propagation(graph: &ItemGraph) -> PropagationMatrix {
    build_propagation_with(graph, &PropagationOptions::default())
}

pub fn build_propagation_with(graph: &ItemGraph, opts: &PropagationOptions) -> PropagationMatrix {
    let n_items = graph.n_items();
    let rows = (0..n_items as u32)
        .map(|i| {
            let mut row = graph.row(i).to_vec();
            if opts.self_loops {
                let pos = row.partition_point(|&(j, _)| j < i);
                row.insert(pos, (i, 1.0));
            }
            if opts.row_normalize {
                let sum: f64 = row.iter().map(|&(_, w)| w).sum();
                if sum > 0.0 {
                    for (_, w) in &mut row {
                        *w /= sum;
                    }
                }
            }
            row
        })
        .collect();
    PropagationMatrix { n_items, rows }
}

impl PropagationMatrix {
    pub fn identity(n_items: usize) -> Self {
        PropagationMatrix {
            n_items,
            rows: (0..n_items as u32).map(|i| vec![(i, 1.0)]).collect(),
        }
    }

    /// Rebuild from coordinate triples (diagonal entries permitted).
    pub fn from_edges(n_items: usize, edges: &[(u32, u32, f64)]) -> Result<Self> {
        let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n_items];
        for &(i, j, w) in edges {
            if i as usize >= n_items || j as usize >= n_items {
                return Err(Error::ItemIndexOutOfRange {
                    index: i.max(j) as usize,
                    n_items,
                });
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidParam(format!("bad propagation weight {w}")));
            }
            rows[i as usize].push((j, w));
        }
        for row in &mut rows {
            row.sort_unstable_by_key(|&(j, _)| j);
        }
        Ok(PropagationMatrix { n_items, rows })
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn row(&self, item: u32) -> &[(u32, f64)] {
        &self.rows[item as usize]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn max_row_support(&self) -> usize {
        self.rows.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&(j, w)| (i as u32, j, w)))
    }

    pub fn transpose(&self) -> PropagationMatrix {
        let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); self.n_items];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, w) in row {
                rows[j as usize].push((i as u32, w));
            }
        }
        // Transposing row-sorted CSR yields rows already sorted by index.
        PropagationMatrix {
            n_items: self.n_items,
            rows,
        }
    }

    /// One aggregation hop: `out[i] = sum_j w_ij x[j]`.
    pub fn apply(&self, x: &ItemEmbeddings) -> ItemEmbeddings {
        let dim = x.dim();
        let mut out = ItemEmbeddings::zeros(self.n_items, dim);
        out.data_mut()
            .par_chunks_mut(dim)
            .enumerate()
            .for_each(|(i, out_row)| {
                for &(j, w) in &self.rows[i] {
                    for (o, s) in out_row.iter_mut().zip(x.row(j)) {
                        *o += w * s;
                    }
                }
            });
        out
    }
}

/// Apply the propagation matrix `depth` times; depth 0 returns the input
/// unchanged.
pub fn propagate(
    p: &PropagationMatrix,
    x0: &ItemEmbeddings,
    depth: usize,
) -> Result<ItemEmbeddings> {
    if p.n_items() != x0.n_items() {
        return Err(Error::DimensionMismatch {
            what: "propagation",
            expected: p.n_items(),
            got: x0.n_items(),
        });
    }
    let mut x = x0.clone();
    for _ in 0..depth {
        x = p.apply(&x);
    }
    Ok(x)
}
