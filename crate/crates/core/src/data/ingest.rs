use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::data::matrix::{InteractionMatrix, InteractionRecord};
use crate::error::{Error, Result};

/// Loader knobs; everything optional.
#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Drop records whose rating falls below this value. Records without a
    /// rating column are always kept as implicit positives.
    pub positive_threshold: Option<f64>,
    /// Field separator. Auto-detected between comma and tab when unset;
    /// multi-character separators (e.g. "::") are accepted.
    pub delimiter: Option<String>,
    /// Number of leading non-comment lines to skip (column headers).
    pub skip_lines: usize,
}

/// Read delimiter-separated interactions: `user, item[, rating[, timestamp]]`.
///
/// Lines beginning with '#' and blank lines are ignored.
pub fn load_interactions(path: &Path, opts: &LoadOptions) -> Result<Vec<InteractionRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);

    let mut records = Vec::new();
    let mut delimiter = opts.delimiter.clone();
    let mut data_lines_seen = 0usize;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        data_lines_seen += 1;
        if data_lines_seen <= opts.skip_lines {
            continue;
        }

        let delim = match &delimiter {
            Some(d) => d.as_str(),
            None => {
                let detected = detect_delimiter(trimmed).ok_or_else(|| {
                    Error::parse(path, line_no, "cannot detect delimiter (no comma or tab)")
                })?;
                delimiter = Some(detected.to_string());
                detected
            }
        };

        let record = parse_line(trimmed, delim)
            .map_err(|message| Error::parse(path, line_no, message))?;

        if let (Some(threshold), Some(rating)) = (opts.positive_threshold, record.rating) {
            if rating < threshold {
                continue;
            }
        }
        records.push(record);
    }

    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(records)
}

fn detect_delimiter(line: &str) -> Option<&'static str> {
    if line.contains('\t') {
        Some("\t")
    } else if line.contains(',') {
        Some(",")
    } else {
        None
    }
}

fn parse_line(line: &str, delim: &str) -> std::result::Result<InteractionRecord, String> {
    let fields: Vec<&str> = line.split(delim).collect();
    if fields.len() < 2 || fields.len() > 4 {
        return Err(format!(
            "expected 2-4 fields separated by {delim:?}, found {}",
            fields.len()
        ));
    }
    let user_key = fields[0].trim();
    let item_key = fields[1].trim();
    if user_key.is_empty() || item_key.is_empty() {
        return Err("empty user or item key".into());
    }
    let rating = match fields.get(2) {
        Some(f) => Some(
            f.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad rating {f:?}"))?,
        ),
        None => None,
    };
    let timestamp = match fields.get(3) {
        Some(f) => Some(
            f.trim()
                .parse::<i64>()
                .map_err(|_| format!("bad timestamp {f:?}"))?,
        ),
        None => None,
    };
    Ok(InteractionRecord {
        user_key: user_key.to_string(),
        item_key: item_key.to_string(),
        rating,
        timestamp,
    })
}

/// Write a matrix back out as a two-column interaction file.
pub fn write_interactions(matrix: &InteractionMatrix, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for u in 0..matrix.n_users() as u32 {
        for &i in matrix.row(u) {
            writeln!(
                w,
                "{}\t{}",
                matrix.user_map().key(u),
                matrix.item_map().key(i)
            )
            .map_err(|e| Error::io(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}
