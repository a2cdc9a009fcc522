//! Embedding files and prediction tables on disk.

use std::fs;
use std::path::Path;

use ecilmu_core::format;
use ecilmu_core::{ClassId, PredictionTable, RecordId, VectorRecord};

use crate::error::{CliError, Result};

/// Writes `bytes` next to `path` and renames it into place, so readers never
/// see a half-written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = Path::new(&tmp);
    fs::write(tmp, bytes).map_err(|e| CliError::io(tmp, e))?;
    fs::rename(tmp, path).map_err(|e| CliError::io(path, e))
}

pub fn write_embeddings(path: &Path, records: &[VectorRecord]) -> Result<()> {
    let bytes = format::encode(records).map_err(|e| CliError::file(path, e))?;
    write_atomic(path, &bytes)
}

pub fn read_embeddings(path: &Path) -> Result<Vec<VectorRecord>> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    format::decode(&bytes).map_err(|e| CliError::file(path, e))
}

/// Reads a headed `id,label` CSV of externally computed predictions.
pub fn read_predictions(path: &Path) -> Result<PredictionTable> {
    let csv_err = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    let mut rows = Vec::new();
    for row in reader.deserialize::<(i64, u32)>() {
        let (id, label) = row.map_err(csv_err)?;
        rows.push((RecordId(id), ClassId(label)));
    }
    Ok(rows.into_iter().collect())
}
