//! Binary model file: versioned header, item key table, `X^(0)` as row-major
//! little-endian f32, propagation matrix as coordinate triples.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::data::IdMap;
use crate::error::{Error, Result};
use crate::graph::{PropagationMatrix, PropagationOptions};
use crate::model::{ItemEmbeddings, ModelConfig, ProfileWeighting, TrainedModel};

const MAGIC: &[u8; 8] = b"IGRECMDL";
const VERSION: u32 = 1;

const FLAG_SELF_LOOPS: u32 = 1 << 0;
const FLAG_ROW_NORMALIZE: u32 = 1 << 1;
const FLAG_MEAN_PROFILE: u32 = 1 << 2;

pub fn write_model(model: &TrainedModel, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);

    w.write_all(MAGIC).map_err(io)?;
    w.write_all(&VERSION.to_le_bytes()).map_err(io)?;

    let cfg = model.config();
    w.write_all(&(cfg.dim as u32).to_le_bytes()).map_err(io)?;
    w.write_all(&(cfg.depth as u32).to_le_bytes()).map_err(io)?;
    let top_k: i64 = cfg.top_k.map_or(-1, |k| k as i64);
    w.write_all(&top_k.to_le_bytes()).map_err(io)?;
    w.write_all(&cfg.dropout_p.to_le_bytes()).map_err(io)?;
    w.write_all(&cfg.l2_reg.to_le_bytes()).map_err(io)?;
    let mut flags = 0u32;
    if cfg.propagation.self_loops {
        flags |= FLAG_SELF_LOOPS;
    }
    if cfg.propagation.row_normalize {
        flags |= FLAG_ROW_NORMALIZE;
    }
    if cfg.weighting == ProfileWeighting::MeanOfProfile {
        flags |= FLAG_MEAN_PROFILE;
    }
    w.write_all(&flags.to_le_bytes()).map_err(io)?;

    let n_items = model.n_items();
    w.write_all(&(n_items as u64).to_le_bytes()).map_err(io)?;
    for key in model.item_map().keys() {
        let bytes = key.as_bytes();
        w.write_all(&(bytes.len() as u32).to_le_bytes()).map_err(io)?;
        w.write_all(bytes).map_err(io)?;
    }

    for &v in model.raw_embeddings().data() {
        w.write_all(&(v as f32).to_le_bytes()).map_err(io)?;
    }

    let p = model.propagation();
    w.write_all(&(p.nnz() as u64).to_le_bytes()).map_err(io)?;
    for (i, j, weight) in p.edges() {
        w.write_all(&i.to_le_bytes()).map_err(io)?;
        w.write_all(&j.to_le_bytes()).map_err(io)?;
        w.write_all(&weight.to_le_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}

struct Reader<'a> {
    inner: BufReader<File>,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.inner
            .read_exact(&mut buf)
            .map_err(|e| Error::io(self.path, e))?;
        Ok(buf)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    fn i64(&mut self) -> Result<i64> {
        Ok(i64::from_le_bytes(self.bytes()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }

    fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.bytes()?))
    }
}

pub fn read_model(path: &Path) -> Result<TrainedModel> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = Reader {
        inner: BufReader::new(file),
        path,
    };

    let magic: [u8; 8] = r.bytes()?;
    if &magic != MAGIC {
        return Err(Error::ModelFormat("bad magic, not a model file".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::ModelFormat(format!(
            "unsupported format version {version}, expected {VERSION}"
        )));
    }

    let dim = r.u32()? as usize;
    let depth = r.u32()? as usize;
    let top_k = match r.i64()? {
        -1 => None,
        k if k >= 1 => Some(k as usize),
        k => return Err(Error::ModelFormat(format!("bad top_k {k}"))),
    };
    let dropout_p = r.f64()?;
    let l2_reg = r.f64()?;
    let flags = r.u32()?;

    let config = ModelConfig {
        dim,
        depth,
        top_k,
        dropout_p,
        l2_reg,
        propagation: PropagationOptions {
            self_loops: flags & FLAG_SELF_LOOPS != 0,
            row_normalize: flags & FLAG_ROW_NORMALIZE != 0,
        },
        weighting: if flags & FLAG_MEAN_PROFILE != 0 {
            ProfileWeighting::MeanOfProfile
        } else {
            ProfileWeighting::Uniform
        },
    };

    let n_items = r.u64()? as usize;
    let mut keys = Vec::with_capacity(n_items);
    for _ in 0..n_items {
        let len = r.u32()? as usize;
        if len > 1 << 20 {
            return Err(Error::ModelFormat(format!("implausible key length {len}")));
        }
        let mut buf = vec![0u8; len];
        r.inner
            .read_exact(&mut buf)
            .map_err(|e| Error::io(path, e))?;
        keys.push(
            String::from_utf8(buf)
                .map_err(|_| Error::ModelFormat("item key is not utf-8".into()))?,
        );
    }

    let mut data = Vec::with_capacity(n_items * dim);
    for _ in 0..n_items * dim {
        data.push(r.f32()? as f64);
    }
    let embeddings = ItemEmbeddings::from_vec(n_items, dim, data)?;

    let nnz = r.u64()? as usize;
    let mut edges = Vec::with_capacity(nnz);
    for _ in 0..nnz {
        let i = r.u32()?;
        let j = r.u32()?;
        let w = r.f64()?;
        edges.push((i, j, w));
    }
    let mut trailing = [0u8; 1];
    if r.inner.read(&mut trailing).map_err(|e| Error::io(path, e))? != 0 {
        return Err(Error::ModelFormat("trailing bytes after model data".into()));
    }

    let propagation = PropagationMatrix::from_edges(n_items, &edges)?;
    TrainedModel::new(embeddings, propagation, config, IdMap::from_keys(keys))
}
