//! Persistent store state: one embedding file per store in a directory.

use std::fs;
use std::io::ErrorKind;
use std::path::Path;

use ecilmu_core::{Databases, StoreName, VectorRecord, VectorStore};

use crate::error::{CliError, Result};
use crate::io::{read_embeddings, write_embeddings};

pub const CIL_FILE: &str = "db-cil.ecmu";
pub const MU_FILE: &str = "db-mu.ecmu";

fn load_store(path: &Path, name: StoreName) -> Result<VectorStore> {
    let mut store = VectorStore::new(name);
    let records = match read_embeddings(path) {
        Ok(r) => r,
        Err(CliError::Io { source, .. }) if source.kind() == ErrorKind::NotFound => {
            return Ok(store)
        }
        Err(e) => return Err(e),
    };
    for r in records {
        store.insert(r).map_err(|e| CliError::file(path, e))?;
    }
    Ok(store)
}

/// Loads both stores; missing files mean empty stores.
pub fn load(dir: &Path) -> Result<Databases> {
    let cil = load_store(&dir.join(CIL_FILE), StoreName::Cil)?;
    let mu = load_store(&dir.join(MU_FILE), StoreName::Mu)?;
    Ok(Databases::from_stores(cil, mu)?)
}

fn save_store(path: &Path, store: &VectorStore) -> Result<()> {
    if store.is_empty() {
        return match fs::remove_file(path) {
            Err(e) if e.kind() != ErrorKind::NotFound => Err(CliError::io(path, e)),
            _ => Ok(()),
        };
    }
    let records: Vec<VectorRecord> = store.records().cloned().collect();
    write_embeddings(path, &records)
}

/// Writes both stores, records in id order. An empty store removes its file.
pub fn save(dir: &Path, db: &Databases) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    save_store(&dir.join(CIL_FILE), db.cil())?;
    save_store(&dir.join(MU_FILE), db.mu())
}
