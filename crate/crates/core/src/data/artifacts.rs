//! On-disk form of prepared datasets: ordered key tables, one interaction
//! file per split part, and a small header recording seed and fractions.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::data::matrix::{IdMap, InteractionMatrix};
use crate::data::split::{DatasetSplit, UserHoldoutSplit};
use crate::error::{Error, Result};

const META_FILE: &str = "split.meta";
const ITEMS_FILE: &str = "items.tsv";

/// Flat key-value header, `key = value` per line.
#[derive(Debug, Clone, Default)]
pub struct Header {
    entries: Vec<(String, String)>,
}

impl Header {
    pub fn new() -> Self {
        Header::default()
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str, path: &Path) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::parse(path, 0, format!("missing header key {key:?}")))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
        for (k, v) in &self.entries {
            writeln!(w, "{k} = {v}").map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Header> {
        let reader = BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?);
        let mut header = Header::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(path, idx + 1, "expected `key = value`"))?;
            header.set(k.trim(), v.trim());
        }
        Ok(header)
    }
}

fn write_keys(keys: &[String], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    for key in keys {
        writeln!(w, "{key}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_keys(path: &Path) -> Result<Vec<String>> {
    let reader = BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?);
    let mut keys = Vec::new();
    for line in reader.lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if !line.is_empty() {
            keys.push(line);
        }
    }
    Ok(keys)
}

fn write_part(matrix: &InteractionMatrix, path: &Path) -> Result<()> {
    crate::data::ingest::write_interactions(matrix, path)
}

fn read_part(path: &Path, user_map: &IdMap, item_map: &IdMap) -> Result<InteractionMatrix> {
    let reader = BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?);
    let mut rows: Vec<Vec<u32>> = vec![Vec::new(); user_map.len()];
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let (u, i) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(path, idx + 1, "expected `user<TAB>item`"))?;
        let u = user_map
            .index_of(u)
            .ok_or_else(|| Error::parse(path, idx + 1, format!("unknown user key {u:?}")))?;
        let i = item_map
            .index_of(i)
            .ok_or_else(|| Error::parse(path, idx + 1, format!("unknown item key {i:?}")))?;
        rows[u as usize].push(i);
    }
    for row in &mut rows {
        row.sort_unstable();
        row.dedup();
    }
    Ok(InteractionMatrix::from_parts(
        rows,
        user_map.clone(),
        item_map.clone(),
    ))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Save the k-cored source matrix (`kind = matrix`).
pub fn save_matrix(matrix: &InteractionMatrix, dir: &Path, extra: &[(&str, String)]) -> Result<()> {
    ensure_dir(dir)?;
    let mut header = Header::new();
    header.set("kind", "matrix");
    header.set("n_users", matrix.n_users());
    header.set("n_items", matrix.n_items());
    header.set("n_interactions", matrix.nnz());
    header.set("universe_hash", matrix.universe_hash());
    for (k, v) in extra {
        header.set(k, v);
    }
    header.write(&dir.join(META_FILE))?;
    write_keys(matrix.item_map().keys(), &dir.join(ITEMS_FILE))?;
    write_keys(matrix.user_map().keys(), &dir.join("users.tsv"))?;
    write_part(matrix, &dir.join("interactions.tsv"))
}

pub fn load_matrix(dir: &Path) -> Result<InteractionMatrix> {
    let header = Header::read(&dir.join(META_FILE))?;
    expect_kind(&header, "matrix", dir)?;
    let item_map = IdMap::from_keys(read_keys(&dir.join(ITEMS_FILE))?);
    let user_map = IdMap::from_keys(read_keys(&dir.join("users.tsv"))?);
    read_part(&dir.join("interactions.tsv"), &user_map, &item_map)
}

pub fn save_dataset_split(
    split: &DatasetSplit,
    train_frac: f64,
    val_frac: f64,
    dir: &Path,
) -> Result<()> {
    ensure_dir(dir)?;
    let mut header = Header::new();
    header.set("kind", "per_user");
    header.set("seed", split.seed);
    header.set("train_frac", train_frac);
    header.set("val_frac", val_frac);
    header.set("n_users", split.train.n_users());
    header.set("n_items", split.train.n_items());
    header.set("universe_hash", split.train.universe_hash());
    header.write(&dir.join(META_FILE))?;
    write_keys(split.train.item_map().keys(), &dir.join(ITEMS_FILE))?;
    write_keys(split.train.user_map().keys(), &dir.join("users.tsv"))?;
    write_part(&split.train, &dir.join("train.tsv"))?;
    write_part(&split.validation, &dir.join("validation.tsv"))?;
    write_part(&split.test, &dir.join("test.tsv"))
}

pub fn load_dataset_split(dir: &Path) -> Result<DatasetSplit> {
    let meta = dir.join(META_FILE);
    let header = Header::read(&meta)?;
    expect_kind(&header, "per_user", dir)?;
    let seed: u64 = parse_header(&header, "seed", &meta)?;
    let item_map = IdMap::from_keys(read_keys(&dir.join(ITEMS_FILE))?);
    let user_map = IdMap::from_keys(read_keys(&dir.join("users.tsv"))?);
    Ok(DatasetSplit {
        train: read_part(&dir.join("train.tsv"), &user_map, &item_map)?,
        validation: read_part(&dir.join("validation.tsv"), &user_map, &item_map)?,
        test: read_part(&dir.join("test.tsv"), &user_map, &item_map)?,
        seed,
    })
}

pub fn save_user_holdout(
    split: &UserHoldoutSplit,
    unseen_frac: f64,
    profile_build_frac: f64,
    dir: &Path,
) -> Result<()> {
    ensure_dir(dir)?;
    let mut header = Header::new();
    header.set("kind", "user_holdout");
    header.set("seed", split.seed);
    header.set("unseen_frac", unseen_frac);
    header.set("profile_build_frac", profile_build_frac);
    header.set("n_seen_users", split.train_users.n_users());
    header.set("n_unseen_users", split.unseen_build.n_users());
    header.set("n_items", split.train_users.n_items());
    header.set("universe_hash", split.train_users.universe_hash());
    header.write(&dir.join(META_FILE))?;
    write_keys(split.train_users.item_map().keys(), &dir.join(ITEMS_FILE))?;
    write_keys(split.train_users.user_map().keys(), &dir.join("seen_users.tsv"))?;
    write_keys(
        split.unseen_build.user_map().keys(),
        &dir.join("unseen_users.tsv"),
    )?;
    write_part(&split.train_users, &dir.join("train_users.tsv"))?;
    write_part(&split.unseen_build, &dir.join("unseen_build.tsv"))?;
    write_part(&split.unseen_eval, &dir.join("unseen_eval.tsv"))
}

pub fn load_user_holdout(dir: &Path) -> Result<UserHoldoutSplit> {
    let meta = dir.join(META_FILE);
    let header = Header::read(&meta)?;
    expect_kind(&header, "user_holdout", dir)?;
    let seed: u64 = parse_header(&header, "seed", &meta)?;
    let item_map = IdMap::from_keys(read_keys(&dir.join(ITEMS_FILE))?);
    let seen_map = IdMap::from_keys(read_keys(&dir.join("seen_users.tsv"))?);
    let unseen_map = IdMap::from_keys(read_keys(&dir.join("unseen_users.tsv"))?);
    Ok(UserHoldoutSplit {
        train_users: read_part(&dir.join("train_users.tsv"), &seen_map, &item_map)?,
        unseen_build: read_part(&dir.join("unseen_build.tsv"), &unseen_map, &item_map)?,
        unseen_eval: read_part(&dir.join("unseen_eval.tsv"), &unseen_map, &item_map)?,
        seed,
    })
}

/// Header of a split directory without loading the parts.
pub fn read_header(dir: &Path) -> Result<Header> {
    Header::read(&dir.join(META_FILE))
}

fn expect_kind(header: &Header, want: &str, dir: &Path) -> Result<()> {
    let got = header.require("kind", dir)?;
    if got != want {
        return Err(Error::InvalidParam(format!(
            "artifact at {} has kind {got:?}, expected {want:?}",
            dir.display()
        )));
    }
    Ok(())
}

fn parse_header<T: std::str::FromStr>(header: &Header, key: &str, path: &Path) -> Result<T> {
    header
        .require(key, path)?
        .parse::<T>()
        .map_err(|_| Error::parse(path, 0, format!("bad value for {key:?}")))
}
