//! Training checkpoints: the model-file image followed by an optimizer
//! appendix (step counter and both moment matrices), so an interrupted run
//! can resume with Adam statistics intact.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{read_model, write_model, TrainedModel};
use crate::train::AdamState;

const APPENDIX_MAGIC: &[u8; 8] = b"ADAMSTAT";

pub fn write_checkpoint(
    model: &TrainedModel,
    adam: &AdamState,
    epoch: usize,
    path: &Path,
) -> Result<()> {
    write_model(model, path)?;
    let file = std::fs::OpenOptions::new()
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    w.write_all(APPENDIX_MAGIC).map_err(io)?;
    w.write_all(&(epoch as u64).to_le_bytes()).map_err(io)?;
    w.write_all(&adam.step_count().to_le_bytes()).map_err(io)?;
    w.write_all(&(adam.n_params() as u64).to_le_bytes()).map_err(io)?;
    for &v in adam.first_moments() {
        w.write_all(&v.to_le_bytes()).map_err(io)?;
    }
    for &v in adam.second_moments() {
        w.write_all(&v.to_le_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub struct Checkpoint {
    pub model: TrainedModel,
    pub adam_step: u64,
    pub first_moments: Vec<f64>,
    pub second_moments: Vec<f64>,
    pub epoch: usize,
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    // The model reader rejects trailing bytes, so locate the appendix first
    // and hand the reader a truncated view.
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let marker = find_appendix(&bytes)
        .ok_or_else(|| Error::ModelFormat("checkpoint has no optimizer appendix".into()))?;

    let tmp = tempfile_for(path, &bytes[..marker])?;
    let model = read_model(tmp.path())?;

    let mut r = BufReader::new(&bytes[marker + APPENDIX_MAGIC.len()..]);
    let mut u64buf = [0u8; 8];
    let mut next_u64 = |r: &mut BufReader<&[u8]>| -> Result<u64> {
        r.read_exact(&mut u64buf).map_err(|e| Error::io(path, e))?;
        Ok(u64::from_le_bytes(u64buf))
    };
    let epoch = next_u64(&mut r)? as usize;
    let adam_step = next_u64(&mut r)?;
    let n_params = next_u64(&mut r)? as usize;
    if n_params != model.n_items() * model.config().dim {
        return Err(Error::ModelFormat(format!(
            "optimizer appendix has {n_params} parameters, model has {}",
            model.n_items() * model.config().dim
        )));
    }
    let mut read_moments = |r: &mut BufReader<&[u8]>| -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(n_params);
        let mut buf = [0u8; 8];
        for _ in 0..n_params {
            r.read_exact(&mut buf).map_err(|e| Error::io(path, e))?;
            out.push(f64::from_le_bytes(buf));
        }
        Ok(out)
    };
    let first_moments = read_moments(&mut r)?;
    let second_moments = read_moments(&mut r)?;

    Ok(Checkpoint {
        model,
        adam_step,
        first_moments,
        second_moments,
        epoch,
    })
}

fn find_appendix(bytes: &[u8]) -> Option<usize> {
    // The appendix magic follows the propagation triples; scan backwards.
    bytes
        .windows(APPENDIX_MAGIC.len())
        .rposition(|w| w == APPENDIX_MAGIC)
}

fn tempfile_for(path: &Path, contents: &[u8]) -> Result<TempPath> {
    let tmp_path = path.with_extension("ckpt-view");
    let mut f = File::create(&tmp_path).map_err(|e| Error::io(&tmp_path, e))?;
    f.write_all(contents).map_err(|e| Error::io(&tmp_path, e))?;
    Ok(TempPath(tmp_path))
}

struct TempPath(std::path::PathBuf);

impl TempPath {
    fn path(&self) -> &Path {
        &self.0
    }
}

impl Drop for TempPath {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.0);
    }
}
