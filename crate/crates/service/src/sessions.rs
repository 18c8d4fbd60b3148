//! The in-memory session store.
//!
//! The map itself sits behind a short-lived synchronous lock; each session has
//! its own async mutex so commands on one session are serialized without
//! blocking the others.

use std::collections::{HashMap, VecDeque};
use std::io;
use std::path::Path;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use termlab_core::completion::CompletionState;

pub type SessionHandle = Arc<tokio::sync::Mutex<CompletionState>>;

#[derive(Debug, Default)]
struct Inner {
    map: HashMap<String, SessionHandle>,
    /// Creation order; the oldest session is evicted when the store is full.
    order: VecDeque<String>,
}

#[derive(Debug)]
pub struct SessionStore {
    inner: Mutex<Inner>,
    capacity: usize,
}

/// On-disk form of one session.
#[derive(Debug, Serialize, Deserialize)]
struct Persisted {
    id: String,
    state: CompletionState,
}

/// A fresh 128-bit identifier in lowercase hex.
pub fn new_id() -> String {
    hex::encode(rand::random::<[u8; 16]>())
}

impl SessionStore {
    pub fn new(capacity: usize) -> Self {
        SessionStore {
            inner: Mutex::new(Inner::default()),
            capacity: capacity.max(1),
        }
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, Inner> {
        // a panic while holding the map lock cannot leave it inconsistent:
        // every critical section is a handful of infallible collection ops
        self.inner.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Inserts a new session, evicting the oldest ones if the store is full.
    /// Returns the id and the ids evicted.
    pub fn insert(&self, state: CompletionState) -> (String, Vec<String>) {
        let mut inner = self.lock();
        let mut evicted = Vec::new();
        while inner.map.len() >= self.capacity {
            let Some(old) = inner.order.pop_front() else { break };
            if inner.map.remove(&old).is_some() {
                evicted.push(old);
            }
        }
        let mut id = new_id();
        while inner.map.contains_key(&id) {
            id = new_id();
        }
        inner.map.insert(id.clone(), Arc::new(tokio::sync::Mutex::new(state)));
        inner.order.push_back(id.clone());
        (id, evicted)
    }

    pub fn get(&self, id: &str) -> Option<SessionHandle> {
        self.lock().map.get(id).cloned()
    }

    pub fn remove(&self, id: &str) -> bool {
        let mut inner = self.lock();
        inner.order.retain(|x| x != id);
        inner.map.remove(id).is_some()
    }

    pub fn len(&self) -> usize {
        self.lock().map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    fn entries(&self) -> Vec<(String, SessionHandle)> {
        let inner = self.lock();
        inner
            .order
            .iter()
            .filter_map(|id| inner.map.get(id).map(|h| (id.clone(), h.clone())))
            .collect()
    }

    /// Writes every session to `dir/<id>.json`. Returns the number written.
    pub async fn save_all(&self, dir: &Path) -> io::Result<usize> {
        std::fs::create_dir_all(dir)?;
        let mut n = 0;
        for (id, handle) in self.entries() {
            let state = handle.lock().await.clone();
            let json = serde_json::to_vec_pretty(&Persisted { id: id.clone(), state })?;
            let tmp = dir.join(format!("{id}.json.tmp"));
            std::fs::write(&tmp, json)?;
            std::fs::rename(&tmp, dir.join(format!("{id}.json")))?;
            n += 1;
        }
        Ok(n)
    }

    /// Loads every `*.json` session in `dir` (in file-name order). Files that
    /// do not parse are skipped and reported.
    pub fn load_all(&self, dir: &Path) -> io::Result<(usize, Vec<String>)> {
        let mut paths: Vec<_> = match std::fs::read_dir(dir) {
            Ok(rd) => rd.filter_map(|e| e.ok().map(|e| e.path())).collect(),
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok((0, Vec::new())),
            Err(e) => return Err(e),
        };
        paths.retain(|p| p.extension().is_some_and(|e| e == "json"));
        paths.sort();
        let mut loaded = 0;
        let mut skipped = Vec::new();
        for p in paths {
            let parsed = std::fs::read(&p)
                .map_err(|e| e.to_string())
                .and_then(|b| serde_json::from_slice::<Persisted>(&b).map_err(|e| e.to_string()));
            match parsed {
                Ok(s) => {
                    let mut inner = self.lock();
                    if inner.map.len() >= self.capacity {
                        skipped.push(format!("{}: store is full", p.display()));
                        continue;
                    }
                    if inner.map.insert(s.id.clone(), Arc::new(tokio::sync::Mutex::new(s.state))).is_none() {
                        inner.order.push_back(s.id);
                    }
                    loaded += 1;
                }
                Err(e) => skipped.push(format!("{}: {e}", p.display())),
            }
        }
        Ok((loaded, skipped))
    }
}
