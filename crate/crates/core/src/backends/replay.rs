use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};

use super::{BackendError, GenerativeBackend, NliBackend, NliScores};
use crate::cascade::GenerationParams;
use crate::hashing::json_hash;
use crate::jsonl::{append_jsonl, read_jsonl_or_empty, JsonlError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CachedResponse {
    Nli(NliScores),
    Text(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CacheLine {
    request_hash: String,
    model: String,
    response: CachedResponse,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplayMode {
    /// Serve hits from the cache, call the backend on misses and record.
    #[default]
    Record,
    /// Serve hits only; a miss is an error.
    Replay,
}

/// Request-hash to response store, optionally persisted as JSONL.
///
/// Reads are concurrent; writes serialize through one lock and append to
/// the backing file.
pub struct ReplayCache {
    path: Option<PathBuf>,
    entries: RwLock<HashMap<String, CachedResponse>>,
    writer: Mutex<()>,
}

impl ReplayCache {
    pub fn in_memory() -> Self {
        Self {
            path: None,
            entries: RwLock::new(HashMap::new()),
            writer: Mutex::new(()),
        }
    }

    pub fn open(path: impl AsRef<Path>) -> Result<Self, JsonlError> {
        let path = path.as_ref().to_path_buf();
        let lines: Vec<CacheLine> = read_jsonl_or_empty(&path)?;
        let entries = lines
            .into_iter()
            .map(|l| (l.request_hash, l.response))
            .collect();
        Ok(Self {
            path: Some(path),
            entries: RwLock::new(entries),
            writer: Mutex::new(()),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, hash: &str) -> Option<CachedResponse> {
        self.entries.read().unwrap().get(hash).cloned()
    }

    pub fn insert(
        &self,
        hash: String,
        model: &str,
        response: CachedResponse,
    ) -> Result<(), JsonlError> {
        let _guard = self.writer.lock().unwrap();
        if self.entries.read().unwrap().contains_key(&hash) {
            return Ok(());
        }
        if let Some(path) = &self.path {
            let line = CacheLine {
                request_hash: hash.clone(),
                model: model.to_string(),
                response: response.clone(),
            };
            append_jsonl(path, [&line])?;
        }
        self.entries.write().unwrap().insert(hash, response);
        Ok(())
    }
}

fn cache_write_err(e: JsonlError) -> BackendError {
    BackendError::fatal(format!("replay cache write failed: {e}"))
}

/// Records or replays an NLI backend through a [`ReplayCache`].
pub struct RecordingNli {
    inner: Option<Arc<dyn NliBackend>>,
    model: String,
    max_premise_chars: Option<usize>,
    cache: Arc<ReplayCache>,
    mode: ReplayMode,
}

impl RecordingNli {
    pub fn new(inner: Arc<dyn NliBackend>, cache: Arc<ReplayCache>, mode: ReplayMode) -> Self {
        Self {
            model: inner.model_identifier().to_string(),
            max_premise_chars: inner.max_premise_chars(),
            inner: Some(inner),
            cache,
            mode,
        }
    }

    /// Replay-only wrapper with no live backend behind it.
    pub fn replay_only(model: impl Into<String>, cache: Arc<ReplayCache>) -> Self {
        Self {
            inner: None,
            model: model.into(),
            max_premise_chars: None,
            cache,
            mode: ReplayMode::Replay,
        }
    }

    fn request_hash(&self, premise: &str, hypothesis: &str) -> String {
        json_hash(&("nli", &self.model, premise, hypothesis))
    }
}

impl NliBackend for RecordingNli {
    fn model_identifier(&self) -> &str {
        &self.model
    }

    fn max_premise_chars(&self) -> Option<usize> {
        self.max_premise_chars
    }

    fn infer(&self, premise: &str, hypothesis: &str) -> Result<NliScores, BackendError> {
        let hash = self.request_hash(premise, hypothesis);
        if let Some(CachedResponse::Nli(s)) = self.cache.get(&hash) {
            return Ok(s);
        }
        let inner = match (&self.inner, self.mode) {
            (Some(inner), ReplayMode::Record) => inner,
            _ => return Err(BackendError::fatal(format!("replay cache miss for {hash}"))),
        };
        let scores = inner.infer(premise, hypothesis)?;
        self.cache
            .insert(hash, &self.model, CachedResponse::Nli(scores))
            .map_err(cache_write_err)?;
        Ok(scores)
    }
}

/// Records or replays a generative backend through a [`ReplayCache`].
///
/// The hash covers the prompt, generation parameters and attempt number.
pub struct RecordingGenerative {
    inner: Option<Arc<dyn GenerativeBackend>>,
    model: String,
    cache: Arc<ReplayCache>,
    mode: ReplayMode,
}

impl RecordingGenerative {
    pub fn new(
        inner: Arc<dyn GenerativeBackend>,
        cache: Arc<ReplayCache>,
        mode: ReplayMode,
    ) -> Self {
        Self {
            model: inner.model_identifier().to_string(),
            inner: Some(inner),
            cache,
            mode,
        }
    }

    pub fn replay_only(model: impl Into<String>, cache: Arc<ReplayCache>) -> Self {
        Self {
            inner: None,
            model: model.into(),
            cache,
            mode: ReplayMode::Replay,
        }
    }
}

impl GenerativeBackend for RecordingGenerative {
    fn model_identifier(&self) -> &str {
        &self.model
    }

    fn generate(&self, prompt: &str, params: &GenerationParams) -> Result<String, BackendError> {
        self.generate_attempt(prompt, params, 0)
    }

    fn generate_attempt(
        &self,
        prompt: &str,
        params: &GenerationParams,
        attempt: u32,
    ) -> Result<String, BackendError> {
        let hash = json_hash(&("generate", &self.model, prompt, params, attempt));
        if let Some(CachedResponse::Text(t)) = self.cache.get(&hash) {
            return Ok(t);
        }
        let inner = match (&self.inner, self.mode) {
            (Some(inner), ReplayMode::Record) => inner,
            _ => return Err(BackendError::fatal(format!("replay cache miss for {hash}"))),
        };
        let text = inner.generate_attempt(prompt, params, attempt)?;
        self.cache
            .insert(hash, &self.model, CachedResponse::Text(text.clone()))
            .map_err(cache_write_err)?;
        Ok(text)
    }
}
