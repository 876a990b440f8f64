//! Append-only catalog snapshot store on the local filesystem.
//!
//! Each snapshot is one immutable JSON file named by a zero-padded,
//! monotonically increasing id. Writes go to a temporary file that is then
//! hard-linked into place, so readers never observe a partial snapshot and an
//! existing snapshot is never overwritten.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{Catalog, CatalogError};

const PREFIX: &str = "snapshot-";
const SUFFIX: &str = ".json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SnapshotId(pub u64);

impl fmt::Display for SnapshotId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl FromStr for SnapshotId {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse().map(SnapshotId)
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("snapshot store I/O failure at {path}: {source}")]
    Storage {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("snapshot {0} not found")]
    NotFound(SnapshotId),
    #[error("snapshot {id} is corrupt: {source}")]
    Corrupt {
        id: SnapshotId,
        #[source]
        source: CatalogError,
    },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Storage {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug)]
pub struct SnapshotStore {
    dir: PathBuf,
    write_lock: Mutex<()>,
}

impl SnapshotStore {
    /// Opens (creating if needed) a store rooted at `dir`.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        Ok(Self {
            dir,
            write_lock: Mutex::new(()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_for(&self, id: SnapshotId) -> PathBuf {
        self.dir.join(format!("{PREFIX}{:020}{SUFFIX}", id.0))
    }

    /// All snapshot ids currently on disk, ascending.
    pub fn list(&self) -> Result<Vec<SnapshotId>, StoreError> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(&self.dir).map_err(io_err(&self.dir))? {
            let entry = entry.map_err(io_err(&self.dir))?;
            let name = entry.file_name();
            let Some(name) = name.to_str() else { continue };
            if let Some(num) = name
                .strip_prefix(PREFIX)
                .and_then(|n| n.strip_suffix(SUFFIX))
            {
                if let Ok(id) = num.parse() {
                    ids.push(SnapshotId(id));
                }
            }
        }
        ids.sort_unstable();
        Ok(ids)
    }

    pub fn latest(&self) -> Result<Option<SnapshotId>, StoreError> {
        Ok(self.list()?.last().copied())
    }

    /// Persists a catalog as a new snapshot and returns its id.
    pub fn store(&self, catalog: &Catalog) -> Result<SnapshotId, StoreError> {
        let body = catalog.to_json_pretty();
        let _guard = self.write_lock.lock().unwrap_or_else(|e| e.into_inner());
        let id = SnapshotId(self.latest()?.map_or(1, |SnapshotId(n)| n + 1));
        let target = self.path_for(id);

        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir).map_err(io_err(&self.dir))?;
        tmp.write_all(body.as_bytes()).map_err(io_err(tmp.path()))?;
        tmp.as_file().sync_all().map_err(io_err(tmp.path()))?;
        // hard_link refuses to replace an existing file
        fs::hard_link(tmp.path(), &target).map_err(io_err(&target))?;
        log::debug!("stored catalog snapshot {id} at {}", target.display());
        Ok(id)
    }

    pub fn load(&self, id: SnapshotId) -> Result<Catalog, StoreError> {
        let path = self.path_for(id);
        let text = match fs::read_to_string(&path) {
            Ok(text) => text,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Err(StoreError::NotFound(id)),
            Err(e) => return Err(io_err(&path)(e)),
        };
        crate::catalog::ingest_catalog(&text).map_err(|source| StoreError::Corrupt { id, source })
    }

    /// The most recent snapshot, if any.
    pub fn load_latest(&self) -> Result<Option<(SnapshotId, Catalog)>, StoreError> {
        match self.latest()? {
            Some(id) => Ok(Some((id, self.load(id)?))),
            None => Ok(None),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn round_trip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let store = SnapshotStore::open(dir.path()).unwrap();
        let catalog = fixtures::example_catalog();
        let id = store.store(&catalog).unwrap();
        assert_eq!(store.load(id).unwrap(), catalog);
    }

    #[test]
    fn unknown_id_is_not_found() {
        let dir = tempfile::tempdir().unwrap();
        let store = SnapshotStore::open(dir.path()).unwrap();
        let id: SnapshotId = "999".parse().unwrap();
        assert!(matches!(
            store.load(id),
            Err(StoreError::NotFound(SnapshotId(999)))
        ));
    }

    #[test]
    fn ids_increase_and_snapshots_stay_immutable() {
        let dir = tempfile::tempdir().unwrap();
        let store = SnapshotStore::open(dir.path()).unwrap();
        let first = fixtures::example_catalog();
        let a = store.store(&first).unwrap();
        let empty =
            crate::catalog::ingest_catalog(r#"{"attributes":[],"mode":"raw","providers":[]}"#)
                .unwrap();
        let b = store.store(&empty).unwrap();
        assert!(b > a);
        assert_eq!(store.load(a).unwrap(), first);
        assert_eq!(store.latest().unwrap(), Some(b));
        // no stray temp files left behind
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 2);
    }

    #[test]
    fn reopening_continues_numbering() {
        let dir = tempfile::tempdir().unwrap();
        let a = SnapshotStore::open(dir.path())
            .unwrap()
            .store(&fixtures::example_catalog())
            .unwrap();
        let b = SnapshotStore::open(dir.path())
            .unwrap()
            .store(&fixtures::example_catalog())
            .unwrap();
        assert_eq!(b.0, a.0 + 1);
    }

    #[test]
    fn concurrent_writers_get_distinct_ids() {
        let dir = tempfile::tempdir().unwrap();
        let store = std::sync::Arc::new(SnapshotStore::open(dir.path()).unwrap());
        let handles: Vec<_> = (0..8)
            .map(|_| {
                let store = store.clone();
                std::thread::spawn(move || store.store(&fixtures::example_catalog()).unwrap())
            })
            .collect();
        let mut ids: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), 8);
    }
}
