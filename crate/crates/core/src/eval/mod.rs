//! Ranking metrics and the transductive/inductive evaluation protocols.

mod protocol;
mod sweep;

pub use protocol::{evaluate_inductive, evaluate_transductive};
pub(crate) use protocol::evaluate_with_embeddings;
pub use sweep::{run_sweep, SweepGrid, SweepPoint, SweepResult, SweepRun};

use std::collections::HashSet;
use std::fmt;

/// Fraction of the relevant items retrieved in the top `n`.
pub fn recall_at_n(ranked: &[u32], relevant: &HashSet<u32>, n: usize) -> f64 {
    assert!(n >= 1, "recall cutoff must be >= 1");
    assert!(!relevant.is_empty(), "recall needs a non-empty relevant set");
    let hits = ranked
        .iter()
        .take(n)
        .filter(|i| relevant.contains(i))
        .count();
    hits as f64 / relevant.len() as f64
}

/// Binary-relevance NDCG with a log2 discount; the ideal DCG is truncated at
/// `min(n, |relevant|)`.
pub fn ndcg_at_n(ranked: &[u32], relevant: &HashSet<u32>, n: usize) -> f64 {
    assert!(n >= 1, "ndcg cutoff must be >= 1");
    assert!(!relevant.is_empty(), "ndcg needs a non-empty relevant set");
    let dcg: f64 = ranked
        .iter()
        .take(n)
        .enumerate()
        .filter(|(_, i)| relevant.contains(i))
        .map(|(pos, _)| 1.0 / ((pos + 2) as f64).log2())
        .sum();
    let ideal: f64 = (0..n.min(relevant.len()))
        .map(|pos| 1.0 / ((pos + 2) as f64).log2())
        .sum();
    dcg / ideal
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    Transductive,
    Inductive,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Protocol::Transductive => write!(f, "transductive"),
            Protocol::Inductive => write!(f, "inductive"),
        }
    }
}

/// Mean Recall@N / NDCG@N per cutoff over the evaluated users.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub protocol: Protocol,
    pub cutoffs: Vec<usize>,
    pub recall: Vec<f64>,
    pub ndcg: Vec<f64>,
    pub n_users_evaluated: usize,
    pub n_skipped: usize,
}

impl MetricsReport {
    pub fn empty(protocol: Protocol, cutoffs: &[usize]) -> Self {
        MetricsReport {
            protocol,
            cutoffs: cutoffs.to_vec(),
            recall: vec![0.0; cutoffs.len()],
            ndcg: vec![0.0; cutoffs.len()],
            n_users_evaluated: 0,
            n_skipped: 0,
        }
    }

    pub fn recall_at(&self, n: usize) -> Option<f64> {
        self.cutoffs.iter().position(|&c| c == n).map(|i| self.recall[i])
    }

    pub fn ndcg_at(&self, n: usize) -> Option<f64> {
        self.cutoffs.iter().position(|&c| c == n).map(|i| self.ndcg[i])
    }

    /// Machine-readable form: `metric<TAB>cutoff<TAB>value` lines.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("protocol\tmetric\tcutoff\tvalue\n");
        for (i, n) in self.cutoffs.iter().enumerate() {
            out.push_str(&format!("{}\trecall\t{}\t{:.6}\n", self.protocol, n, self.recall[i]));
        }
        for (i, n) in self.cutoffs.iter().enumerate() {
            out.push_str(&format!("{}\tndcg\t{}\t{:.6}\n", self.protocol, n, self.ndcg[i]));
        }
        out
    }
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} evaluation over {} users ({} skipped)",
            self.protocol, self.n_users_evaluated, self.n_skipped
        )?;
        write!(f, "{:>10}", "cutoff")?;
        for n in &self.cutoffs {
            write!(f, "{:>12}", format!("@{n}"))?;
        }
        writeln!(f)?;
        write!(f, "{:>10}", "recall")?;
        for v in &self.recall {
            write!(f, "{v:>12.4}")?;
        }
        writeln!(f)?;
        write!(f, "{:>10}", "ndcg")?;
        for v in &self.ndcg {
            write!(f, "{v:>12.4}")?;
        }
        Ok(())
    }
}
