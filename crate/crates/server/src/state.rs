use std::collections::BTreeMap;
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use ombudsman_core::annotation::AnnotationStore;
use ombudsman_core::corpus::Post;
use ombudsman_core::scanner::ScanStore;

pub type Clock = Box<dyn Fn() -> DateTime<Utc> + Send + Sync>;

/// Shared server state.
pub struct AppState {
    pub scans: ScanStore,
    pub annotations: AnnotationStore,
    /// Posts offered for annotation, by id.
    pub posts: BTreeMap<String, Post>,
    /// Timestamp source for labels submitted without one.
    pub clock: Clock,
    /// Serializes label checks with their writes.
    pub(crate) write_lock: Mutex<()>,
}

impl AppState {
    pub fn new(scans: ScanStore, annotations: AnnotationStore, posts: Vec<Post>) -> Self {
        Self {
            scans,
            annotations,
            posts: posts.into_iter().map(|p| (p.post_id.clone(), p)).collect(),
            clock: Box::new(Utc::now),
            write_lock: Mutex::new(()),
        }
    }

    pub fn with_clock(mut self, clock: Clock) -> Self {
        self.clock = clock;
        self
    }
}
