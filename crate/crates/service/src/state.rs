use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use rfbroker_core::pipeline::SelectionReport;
use rfbroker_core::{Catalog, SelectionRequest, SlaManager, SnapshotId, SnapshotStore, StoreError};

use crate::config::BrokerConfig;

/// A stored selection: the request, the snapshot it ran against and the
/// resulting report. Immutable once written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRecord {
    pub request_id: String,
    pub snapshot_id: SnapshotId,
    pub created_at: DateTime<Utc>,
    pub request: SelectionRequest,
    pub report: SelectionReport,
}

/// Append-only directory of selection records.
#[derive(Debug)]
pub struct SelectionLog {
    dir: PathBuf,
    inner: Mutex<(u64, HashMap<String, SelectionRecord>)>,
}

impl SelectionLog {
    pub fn open(dir: PathBuf) -> std::io::Result<Self> {
        fs::create_dir_all(&dir)?;
        let mut records = HashMap::new();
        let mut last = 0;
        for entry in fs::read_dir(&dir)? {
            let path = entry?.path();
            let Some(n) = path.file_name().and_then(|n| n.to_str()).and_then(|n| {
                n.strip_prefix("sel-")?
                    .strip_suffix(".json")?
                    .parse::<u64>()
                    .ok()
            }) else {
                continue;
            };
            let record: SelectionRecord = serde_json::from_slice(&fs::read(&path)?)
                .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
            last = last.max(n);
            records.insert(record.request_id.clone(), record);
        }
        Ok(Self {
            dir,
            inner: Mutex::new((last, records)),
        })
    }

    /// Assigns an id, persists the record and returns it.
    pub fn append(
        &self,
        snapshot_id: SnapshotId,
        request: SelectionRequest,
        report: SelectionReport,
    ) -> std::io::Result<SelectionRecord> {
        let mut inner = self.inner.lock().unwrap_or_else(|e| e.into_inner());
        let n = inner.0 + 1;
        let record = SelectionRecord {
            request_id: format!("sel-{n}"),
            snapshot_id,
            created_at: Utc::now(),
            request,
            report,
        };
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(&serde_json::to_vec_pretty(&record).map_err(std::io::Error::other)?)?;
        tmp.as_file().sync_all()?;
        tmp.persist_noclobber(self.dir.join(format!("{}.json", record.request_id)))
            .map_err(|e| e.error)?;
        inner.0 = n;
        inner.1.insert(record.request_id.clone(), record.clone());
        Ok(record)
    }

    pub fn get(&self, request_id: &str) -> Option<SelectionRecord> {
        self.inner
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .1
            .get(request_id)
            .cloned()
    }
}

/// Shared state behind every handler.
pub struct AppState {
    pub config: BrokerConfig,
    pub store: SnapshotStore,
    pub selections: SelectionLog,
    pub sla: SlaManager,
    current: RwLock<Option<(SnapshotId, Arc<Catalog>)>>,
}

#[derive(Debug, thiserror::Error)]
pub enum StateError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("cannot open {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl AppState {
    pub fn open(config: BrokerConfig) -> Result<Self, StateError> {
        let data = config.data_dir.clone();
        let store = SnapshotStore::open(data.join("catalog"))?;
        let current = store.load_latest()?.map(|(id, c)| (id, Arc::new(c)));
        let sel_dir = data.join("selections");
        let selections = SelectionLog::open(sel_dir.clone()).map_err(|source| StateError::Io {
            path: sel_dir,
            source,
        })?;
        let sla = SlaManager::new().with_journal(data.join("violations.jsonl"));
        Ok(Self {
            config,
            store,
            selections,
            sla,
            current: RwLock::new(current),
        })
    }

    pub fn data_dir(&self) -> &Path {
        &self.config.data_dir
    }

    /// Latest catalog snapshot, if one has been stored.
    pub fn current_catalog(&self) -> Option<(SnapshotId, Arc<Catalog>)> {
        self.current
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .clone()
    }

    /// Persists `catalog` as a new snapshot and makes it current.
    pub fn replace_catalog(&self, catalog: Catalog) -> Result<SnapshotId, StoreError> {
        let mut current = self.current.write().unwrap_or_else(|e| e.into_inner());
        let id = self.store.store(&catalog)?;
        *current = Some((id, Arc::new(catalog)));
        Ok(id)
    }
}
