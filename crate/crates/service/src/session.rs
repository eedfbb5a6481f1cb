//! In-memory image sessions and the LRU registry that owns them.

use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, Mutex, RwLock};

use patchknn_core::wire::{BuildStatus, MetaResponse};
use patchknn_core::{GridMeta, PatchGrid, PatchIndex};

#[derive(Debug, Clone)]
pub enum BuildState {
    Pending,
    Ready(Arc<PatchIndex>),
    Failed(String),
}

impl BuildState {
    pub fn status(&self) -> BuildStatus {
        match self {
            BuildState::Pending => BuildStatus::Pending,
            BuildState::Ready(_) => BuildStatus::Ready,
            BuildState::Failed(_) => BuildStatus::Failed,
        }
    }
}

/// One uploaded image. The grid is immutable; only the build state changes,
/// and only once, from pending to ready or failed.
#[derive(Debug)]
pub struct Session {
    id: String,
    grid: PatchGrid,
    state: RwLock<BuildState>,
}

impl Session {
    pub fn new(id: String, grid: PatchGrid) -> Self {
        Session {
            id,
            grid,
            state: RwLock::new(BuildState::Pending),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn grid(&self) -> &PatchGrid {
        &self.grid
    }

    pub fn meta(&self) -> GridMeta {
        self.grid.meta()
    }

    pub fn state(&self) -> BuildState {
        self.state.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    /// Records the build outcome. Later calls are ignored so the transition
    /// stays monotonic.
    pub fn finish(&self, outcome: Result<PatchIndex, String>) {
        let mut state = self.state.write().unwrap_or_else(|e| e.into_inner());
        if matches!(*state, BuildState::Pending) {
            *state = match outcome {
                Ok(index) => BuildState::Ready(Arc::new(index)),
                Err(reason) => BuildState::Failed(reason),
            };
        }
    }

    pub fn describe(&self) -> MetaResponse {
        let meta = self.meta();
        let state = self.state();
        MetaResponse {
            height: meta.height,
            width: meta.width,
            patch_size: meta.patch_size,
            grid_w: meta.grid_width(),
            grid_h: meta.grid_height(),
            n_patches: meta.n_patches(),
            status: state.status(),
            error: match state {
                BuildState::Failed(reason) => Some(reason),
                _ => None,
            },
        }
    }
}

/// Sessions keyed by id, evicting the least recently used past `capacity`.
#[derive(Debug)]
pub struct Registry {
    capacity: usize,
    inner: Mutex<Lru>,
}

#[derive(Debug, Default)]
struct Lru {
    map: HashMap<String, Arc<Session>>,
    // front = least recently used
    order: VecDeque<String>,
}

impl Lru {
    fn touch(&mut self, id: &str) {
        if let Some(pos) = self.order.iter().position(|k| k == id) {
            let key = self.order.remove(pos).expect("position is valid");
            self.order.push_back(key);
        }
    }
}

impl Registry {
    pub fn new(capacity: usize) -> Self {
        Registry {
            capacity: capacity.max(1),
            inner: Mutex::new(Lru::default()),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Inserts a session and returns the ids evicted to make room.
    pub fn insert(&self, session: Arc<Session>) -> Vec<String> {
        let mut lru = self.inner.lock().unwrap_or_else(|e| e.into_inner());
        let id = session.id().to_string();
        if lru.map.insert(id.clone(), session).is_some() {
            lru.touch(&id);
        } else {
            lru.order.push_back(id);
        }
        let mut evicted = Vec::new();
        while lru.map.len() > self.capacity {
            let oldest = lru.order.pop_front().expect("order tracks every key");
            lru.map.remove(&oldest);
            evicted.push(oldest);
        }
        evicted
    }

    pub fn get(&self, id: &str) -> Option<Arc<Session>> {
        let mut lru = self.inner.lock().unwrap_or_else(|e| e.into_inner());
        let session = lru.map.get(id).cloned()?;
        lru.touch(id);
        Some(session)
    }

    pub fn len(&self) -> usize {
        self.inner
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .map
            .len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
