use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock, RwLock};
use std::time::{Duration, Instant};

use hetree::{sort_dataset, Dataset, ExplorationSession, SharedDataset};

use crate::error::ApiError;

#[derive(Debug)]
pub struct DatasetEntry {
    /// As uploaded; incremental sessions start from this order.
    pub raw: SharedDataset,
    sorted: OnceLock<SharedDataset>,
    last_used: Mutex<Instant>,
}

impl DatasetEntry {
    fn new(raw: Dataset) -> Self {
        Self { raw: Arc::new(raw), sorted: OnceLock::new(), last_used: Mutex::new(Instant::now()) }
    }

    /// Sorted once on first full build.
    pub fn sorted(&self) -> SharedDataset {
        self.sorted
            .get_or_init(|| if self.raw.is_sorted() { self.raw.clone() } else { Arc::new(sort_dataset(Dataset::clone(&self.raw))) })
            .clone()
    }
}

#[derive(Debug)]
pub struct SessionEntry {
    pub dataset_id: u64,
    /// Readers share; a mutation takes it exclusively or is refused.
    pub session: Arc<tokio::sync::RwLock<ExplorationSession>>,
    last_used: Mutex<Instant>,
}

#[derive(Debug)]
pub struct Registry {
    next_id: AtomicU64,
    datasets: RwLock<HashMap<u64, Arc<DatasetEntry>>>,
    sessions: RwLock<HashMap<u64, Arc<SessionEntry>>>,
}

impl Default for Registry {
    fn default() -> Self {
        Self { next_id: AtomicU64::new(1), datasets: RwLock::default(), sessions: RwLock::default() }
    }
}

fn touch(at: &Mutex<Instant>) {
    *at.lock().unwrap_or_else(|e| e.into_inner()) = Instant::now();
}

fn idle_for(at: &Mutex<Instant>, now: Instant) -> Duration {
    now.saturating_duration_since(*at.lock().unwrap_or_else(|e| e.into_inner()))
}

impl Registry {
    fn fresh_id(&self) -> u64 {
        self.next_id.fetch_add(1, Ordering::Relaxed)
    }

    pub fn add_dataset(&self, dataset: Dataset) -> (u64, Arc<DatasetEntry>) {
        let id = self.fresh_id();
        let entry = Arc::new(DatasetEntry::new(dataset));
        self.datasets.write().unwrap_or_else(|e| e.into_inner()).insert(id, entry.clone());
        (id, entry)
    }

    pub fn dataset(&self, id: u64) -> Result<Arc<DatasetEntry>, ApiError> {
        let entry = self.datasets.read().unwrap_or_else(|e| e.into_inner()).get(&id).cloned();
        let entry = entry.ok_or(ApiError::NotFound { what: "dataset", id })?;
        touch(&entry.last_used);
        Ok(entry)
    }

    pub fn add_session(&self, dataset_id: u64, session: ExplorationSession) -> u64 {
        let id = self.fresh_id();
        let entry = SessionEntry {
            dataset_id,
            session: Arc::new(tokio::sync::RwLock::new(session)),
            last_used: Mutex::new(Instant::now()),
        };
        self.sessions.write().unwrap_or_else(|e| e.into_inner()).insert(id, Arc::new(entry));
        id
    }

    pub fn session(&self, id: u64) -> Result<Arc<SessionEntry>, ApiError> {
        let entry = self.sessions.read().unwrap_or_else(|e| e.into_inner()).get(&id).cloned();
        let entry = entry.ok_or(ApiError::NotFound { what: "session", id })?;
        touch(&entry.last_used);
        if let Some(ds) = self.datasets.read().unwrap_or_else(|e| e.into_inner()).get(&entry.dataset_id) {
            touch(&ds.last_used);
        }
        Ok(entry)
    }

    pub fn session_count(&self) -> usize {
        self.sessions.read().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn dataset_count(&self) -> usize {
        self.datasets.read().unwrap_or_else(|e| e.into_inner()).len()
    }

    /// Drops sessions idle for at least `ttl`, then datasets idle that long with no session left.
    pub fn evict_idle(&self, ttl: Duration, now: Instant) {
        let mut sessions = self.sessions.write().unwrap_or_else(|e| e.into_inner());
        sessions.retain(|_, s| idle_for(&s.last_used, now) < ttl);
        let live: std::collections::HashSet<u64> = sessions.values().map(|s| s.dataset_id).collect();
        drop(sessions);
        self.datasets
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .retain(|id, d| live.contains(id) || idle_for(&d.last_used, now) < ttl);
    }
}

pub(crate) async fn evict_loop(registry: Arc<Registry>, ttl: Duration) {
    let period = (ttl / 4).max(Duration::from_secs(1));
    let mut tick = tokio::time::interval(period);
    loop {
        tick.tick().await;
        registry.evict_idle(ttl, Instant::now());
    }
}
