use std::time::Duration;

use reqwest::blocking::Client;
use serde::{Deserialize, Serialize};

/// A raw detection from an NER backend, before category filtering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectedEntity {
    pub start: usize,
    pub end: usize,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NerError {
    #[error("ner backend failed: {0}")]
    Backend(String),
    #[error("ner backend returned span {start}..{end} outside text of length {len}")]
    InvalidSpan {
        start: usize,
        end: usize,
        len: usize,
    },
}

/// Named-entity recognizer. Offsets are codepoint offsets into `text`.
pub trait NerBackend: Send + Sync {
    /// Identifier including version, pinned in configuration.
    fn identifier(&self) -> &str;
    fn detect(&self, text: &str) -> Result<Vec<DetectedEntity>, NerError>;
}

/// NER served over HTTP: `POST {"text": ...}` answered with
/// `{"entities": [{"start", "end", "label"}]}` (spaCy-style labels,
/// codepoint offsets).
pub struct HttpNer {
    client: Client,
    url: String,
    identifier: String,
}

impl HttpNer {
    pub fn new(url: impl Into<String>, identifier: impl Into<String>) -> Result<Self, NerError> {
        let client = Client::builder()
            .timeout(Duration::from_secs(60))
            .build()
            .map_err(|e| NerError::Backend(e.to_string()))?;
        Ok(Self {
            client,
            url: url.into(),
            identifier: identifier.into(),
        })
    }
}

#[derive(Deserialize)]
struct NerResponse {
    entities: Vec<DetectedEntity>,
}

impl NerBackend for HttpNer {
    fn identifier(&self) -> &str {
        &self.identifier
    }

    fn detect(&self, text: &str) -> Result<Vec<DetectedEntity>, NerError> {
        let resp = self
            .client
            .post(&self.url)
            .json(&serde_json::json!({ "text": text, "model": self.identifier }))
            .send()
            .map_err(|e| NerError::Backend(e.to_string()))?;
        if !resp.status().is_success() {
            return Err(NerError::Backend(format!("HTTP {}", resp.status())));
        }
        resp.json::<NerResponse>()
            .map(|r| r.entities)
            .map_err(|e| NerError::Backend(e.to_string()))
    }
}
