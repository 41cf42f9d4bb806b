use std::collections::HashMap;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// A single implicit-feedback event as read from an interaction file.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionRecord {
    pub user_key: String,
    pub item_key: String,
    pub rating: Option<f64>,
    pub timestamp: Option<i64>,
}

/// Bijection between opaque external keys and dense indices.
#[derive(Debug, Clone, PartialEq)]
pub struct IdMap {
    keys: Vec<String>,
    index: HashMap<String, u32>,
}

impl IdMap {
    pub(crate) fn from_keys(keys: Vec<String>) -> Self {
        let index = keys
            .iter()
            .enumerate()
            .map(|(i, k)| (k.clone(), i as u32))
            .collect();
        IdMap { keys, index }
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn key(&self, idx: u32) -> &str {
        &self.keys[idx as usize]
    }

    pub fn index_of(&self, key: &str) -> Option<u32> {
        self.index.get(key).copied()
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    /// New map containing only `kept`, reindexed densely in the given order.
    pub(crate) fn subset(&self, kept: &[u32]) -> IdMap {
        IdMap::from_keys(kept.iter().map(|&i| self.keys[i as usize].clone()).collect())
    }
}

/// Sparse binary user-item matrix with stable key maps.
///
/// Rows are strictly increasing item-index lists; every stored cell is an
/// implicit positive.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionMatrix {
    n_items: usize,
    rows: Vec<Vec<u32>>,
    user_map: IdMap,
    item_map: IdMap,
}

impl InteractionMatrix {
    /// Internal constructor; callers guarantee rows are sorted, deduplicated
    /// and in range.
    pub(crate) fn from_parts(rows: Vec<Vec<u32>>, user_map: IdMap, item_map: IdMap) -> Self {
        debug_assert_eq!(rows.len(), user_map.len());
        debug_assert!(rows
            .iter()
            .all(|r| r.windows(2).all(|w| w[0] < w[1])
                && r.last().is_none_or(|&i| (i as usize) < item_map.len())));
        InteractionMatrix {
            n_items: item_map.len(),
            rows,
            user_map,
            item_map,
        }
    }

    pub fn n_users(&self) -> usize {
        self.rows.len()
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    /// Number of stored interactions.
    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Item indices the user has interacted with, strictly increasing.
    pub fn row(&self, user: u32) -> &[u32] {
        &self.rows[user as usize]
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn contains(&self, user: u32, item: u32) -> bool {
        self.rows[user as usize].binary_search(&item).is_ok()
    }

    pub fn user_map(&self) -> &IdMap {
        &self.user_map
    }

    pub fn item_map(&self) -> &IdMap {
        &self.item_map
    }

    pub fn user_degree(&self, user: u32) -> usize {
        self.rows[user as usize].len()
    }

    pub fn item_degrees(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.n_items];
        for row in &self.rows {
            for &i in row {
                deg[i as usize] += 1;
            }
        }
        deg
    }

    /// Column-wise view: per item, the sorted list of users holding it.
    pub fn columns(&self) -> Vec<Vec<u32>> {
        let mut cols = vec![Vec::new(); self.n_items];
        for (u, row) in self.rows.iter().enumerate() {
            for &i in row {
                cols[i as usize].push(u as u32);
            }
        }
        cols
    }

    /// Cell-wise union with `other`; both sides must share id maps.
    pub fn merge(&self, other: &InteractionMatrix) -> Result<InteractionMatrix> {
        if self.user_map != other.user_map || self.item_map != other.item_map {
            return Err(Error::InvalidParam(
                "cannot merge matrices with different id maps".into(),
            ));
        }
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| {
                let mut merged: Vec<u32> = a.iter().chain(b.iter()).copied().collect();
                merged.sort_unstable();
                merged.dedup();
                merged
            })
            .collect();
        Ok(InteractionMatrix::from_parts(
            rows,
            self.user_map.clone(),
            self.item_map.clone(),
        ))
    }

    /// Hex digest of the item universe, used to detect mixed artifacts.
    pub fn universe_hash(&self) -> String {
        universe_hash(self.item_map.keys())
    }
}

pub fn universe_hash(item_keys: &[String]) -> String {
    let mut hasher = Sha256::new();
    for key in item_keys {
        hasher.update(key.as_bytes());
        hasher.update([0u8]);
    }
    let digest = hasher.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Build the binary interaction matrix from raw records.
///
/// Duplicate (user, item) pairs collapse to a single cell; dense indices are
/// assigned in first-appearance order.
pub fn build_matrix(records: &[InteractionRecord]) -> Result<InteractionMatrix> {
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }

    let mut user_keys: Vec<String> = Vec::new();
    let mut item_keys: Vec<String> = Vec::new();
    let mut user_index: HashMap<&str, u32> = HashMap::new();
    let mut item_index: HashMap<&str, u32> = HashMap::new();
    let mut rows: Vec<Vec<u32>> = Vec::new();

    for rec in records {
        if rec.user_key.is_empty() || rec.item_key.is_empty() {
            return Err(Error::InvalidParam(
                "interaction record with empty user or item key".into(),
            ));
        }
        let u = *user_index.entry(rec.user_key.as_str()).or_insert_with(|| {
            user_keys.push(rec.user_key.clone());
            rows.push(Vec::new());
            (user_keys.len() - 1) as u32
        });
        let i = *item_index.entry(rec.item_key.as_str()).or_insert_with(|| {
            item_keys.push(rec.item_key.clone());
            (item_keys.len() - 1) as u32
        });
        rows[u as usize].push(i);
    }

    for row in &mut rows {
        row.sort_unstable();
        row.dedup();
    }

    Ok(InteractionMatrix::from_parts(
        rows,
        IdMap::from_keys(user_keys),
        IdMap::from_keys(item_keys),
    ))
}
