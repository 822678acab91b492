use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::types::{BackendKind, ChatRequest};
use super::{Backend, Reply};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayEntry {
    pub fingerprint: String,
    #[serde(default)]
    pub sample: u32,
    pub content: String,
    #[serde(default)]
    pub purpose: String,
    #[serde(default)]
    pub model: String,
    #[serde(default)]
    pub temperature: f64,
}

#[derive(Debug, Default)]
struct Inner {
    entries: HashMap<(String, u32), ReplayEntry>,
    order: Vec<(String, u32)>,
}

/// Append-only JSON-lines store of recorded responses keyed by
/// (fingerprint, sample ordinal).
#[derive(Debug)]
pub struct ReplayStore {
    path: Option<PathBuf>,
    inner: Mutex<Inner>,
}

impl ReplayStore {
    pub fn in_memory() -> Self {
        Self {
            path: None,
            inner: Mutex::new(Inner::default()),
        }
    }

    /// Opens a store file, creating nothing until the first append. A
    /// missing file is an empty store.
    pub fn open(path: &Path) -> Result<Self> {
        let store = Self {
            path: Some(path.to_path_buf()),
            inner: Mutex::new(Inner::default()),
        };
        if path.exists() {
            let file = File::open(path).map_err(|e| Error::io(path, e))?;
            let mut inner = store.inner.lock().unwrap();
            for (i, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| Error::io(path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let entry: ReplayEntry = serde_json::from_str(&line).map_err(|e| Error::MalformedRow {
                    path: path.display().to_string(),
                    row: i + 1,
                    message: e.to_string(),
                })?;
                Self::insert(&mut inner, entry);
            }
        }
        Ok(store)
    }

    pub fn from_entries(entries: impl IntoIterator<Item = ReplayEntry>) -> Self {
        let store = Self::in_memory();
        {
            let mut inner = store.inner.lock().unwrap();
            for e in entries {
                Self::insert(&mut inner, e);
            }
        }
        store
    }

    fn insert(inner: &mut Inner, entry: ReplayEntry) -> bool {
        let key = (entry.fingerprint.clone(), entry.sample);
        if let Some(existing) = inner.entries.get(&key) {
            if existing.content != entry.content {
                log::warn!(
                    "replay store already holds a different response for {} sample {}; keeping the first",
                    key.0,
                    key.1
                );
            }
            return false;
        }
        inner.order.push(key.clone());
        inner.entries.insert(key, entry);
        true
    }

    pub fn get(&self, fingerprint: &str, sample: u32) -> Option<String> {
        let inner = self.inner.lock().unwrap();
        inner
            .entries
            .get(&(fingerprint.to_string(), sample))
            .map(|e| e.content.clone())
    }

    pub fn len(&self) -> usize {
        self.inner.lock().unwrap().order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn entries(&self) -> Vec<ReplayEntry> {
        let inner = self.inner.lock().unwrap();
        inner.order.iter().map(|k| inner.entries[k].clone()).collect()
    }

    /// Adds an entry; duplicates of an existing key are ignored.
    pub fn append(&self, entry: ReplayEntry) -> Result<()> {
        let mut inner = self.inner.lock().unwrap();
        let line = serde_json::to_string(&entry)?;
        if !Self::insert(&mut inner, entry) {
            return Ok(());
        }
        if let Some(path) = &self.path {
            let mut file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(|e| Error::io(path, e))?;
            writeln!(file, "{line}").map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }

    pub fn record(&self, req: &ChatRequest, content: &str) -> Result<()> {
        self.append(ReplayEntry {
            fingerprint: req.fingerprint(),
            sample: req.sample,
            content: content.to_string(),
            purpose: req.purpose.as_str().into(),
            model: req.config.model_id.clone(),
            temperature: req.config.temperature,
        })
    }
}

/// Serves recorded responses only. A miss is an error, never a live call.
pub struct ReplayBackend {
    store: std::sync::Arc<ReplayStore>,
}

impl ReplayBackend {
    pub fn new(store: std::sync::Arc<ReplayStore>) -> Self {
        Self { store }
    }
}

impl Backend for ReplayBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Replay
    }

    fn send(&self, req: &ChatRequest, fingerprint: &str) -> Result<Reply> {
        match self.store.get(fingerprint, req.sample) {
            Some(content) => Ok(Reply { content, attempts: 1 }),
            None => Err(Error::ReplayMiss {
                fingerprint: fingerprint.to_string(),
                sample: req.sample,
            }),
        }
    }
}

/// Wraps another backend and appends every successful exchange to a store.
pub struct RecordingBackend {
    inner: std::sync::Arc<dyn Backend>,
    store: std::sync::Arc<ReplayStore>,
}

impl RecordingBackend {
    pub fn new(inner: std::sync::Arc<dyn Backend>, store: std::sync::Arc<ReplayStore>) -> Self {
        Self { inner, store }
    }
}

impl Backend for RecordingBackend {
    fn kind(&self) -> BackendKind {
        self.inner.kind()
    }

    fn send(&self, req: &ChatRequest, fingerprint: &str) -> Result<Reply> {
        let reply = self.inner.send(req, fingerprint)?;
        self.store.record(req, &reply.content)?;
        Ok(reply)
    }
}
