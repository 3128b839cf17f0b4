use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::sync::RwLock;

use super::records::AnnotationRecord;
use crate::jsonl::{self, JsonlError};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("annotator {annotator_id} already labeled {post_id}")]
    Duplicate {
        post_id: String,
        annotator_id: String,
    },
    #[error(transparent)]
    Io(#[from] JsonlError),
}

#[derive(Default)]
struct Inner {
    records: Vec<AnnotationRecord>,
    keys: HashSet<(String, String)>,
}

/// Annotation records with at most one record per (post, annotator).
///
/// A second submission for the same pair is rejected rather than
/// overwriting the first. When backed by a file, every accepted record is
/// appended to it before `insert` returns.
#[derive(Default)]
pub struct AnnotationStore {
    inner: RwLock<Inner>,
    path: Option<PathBuf>,
}

impl AnnotationStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens (or starts) a JSONL-backed store.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let path = path.as_ref().to_path_buf();
        let existing: Vec<AnnotationRecord> = jsonl::read_jsonl_or_empty(&path)?;
        let store = Self {
            inner: RwLock::default(),
            path: Some(path),
        };
        {
            let mut inner = store.inner.write().expect("store lock");
            for r in existing {
                Self::admit(&mut inner, r)?;
            }
        }
        Ok(store)
    }

    pub fn from_records(records: Vec<AnnotationRecord>) -> Result<Self, StoreError> {
        let store = Self::in_memory();
        for r in records {
            store.insert(r)?;
        }
        Ok(store)
    }

    fn admit(inner: &mut Inner, record: AnnotationRecord) -> Result<(), StoreError> {
        let key = (record.post_id.clone(), record.annotator_id.clone());
        if inner.keys.contains(&key) {
            return Err(StoreError::Duplicate {
                post_id: key.0,
                annotator_id: key.1,
            });
        }
        inner.keys.insert(key);
        inner.records.push(record);
        Ok(())
    }

    pub fn insert(&self, record: AnnotationRecord) -> Result<(), StoreError> {
        let mut inner = self.inner.write().expect("store lock");
        let key = (record.post_id.clone(), record.annotator_id.clone());
        if inner.keys.contains(&key) {
            return Err(StoreError::Duplicate {
                post_id: key.0,
                annotator_id: key.1,
            });
        }
        if let Some(path) = &self.path {
            jsonl::append_jsonl(path, std::slice::from_ref(&record))?;
        }
        Self::admit(&mut inner, record)
    }

    pub fn contains(&self, post_id: &str, annotator_id: &str) -> bool {
        let inner = self.inner.read().expect("store lock");
        inner
            .keys
            .contains(&(post_id.to_string(), annotator_id.to_string()))
    }

    pub fn records(&self) -> Vec<AnnotationRecord> {
        self.inner.read().expect("store lock").records.clone()
    }

    pub fn for_post(&self, post_id: &str) -> Vec<AnnotationRecord> {
        let inner = self.inner.read().expect("store lock");
        inner
            .records
            .iter()
            .filter(|r| r.post_id == post_id)
            .cloned()
            .collect()
    }

    pub fn len(&self) -> usize {
        self.inner.read().expect("store lock").records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<AnnotationRecord>, JsonlError> {
    jsonl::read_jsonl(path)
}
