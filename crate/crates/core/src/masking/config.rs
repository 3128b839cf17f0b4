use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::frequency::CountMode;
use super::gazetteer::{GazetteerNer, GAZETTEER_NER_ID};
use super::mask::DEFAULT_MASK_TOKEN;
use super::ner::{HttpNer, NerBackend, NerError};

/// Which NER backend to use, pinned by identifier.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NerConfig {
    #[default]
    Gazetteer,
    Http {
        url: String,
        identifier: String,
    },
}

impl NerConfig {
    pub fn identifier(&self) -> &str {
        match self {
            NerConfig::Gazetteer => GAZETTEER_NER_ID,
            NerConfig::Http { identifier, .. } => identifier,
        }
    }

    pub fn build(&self) -> Result<Arc<dyn NerBackend>, NerError> {
        Ok(match self {
            NerConfig::Gazetteer => Arc::new(GazetteerNer::default()),
            NerConfig::Http { url, identifier } => Arc::new(HttpNer::new(url, identifier)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaskingConfig {
    pub mask_token: String,
    pub ner: NerConfig,
    /// Stoplist file for frequency reports; the built-in list when unset.
    pub stoplist: Option<String>,
    pub count_mode: CountMode,
}

impl Default for MaskingConfig {
    fn default() -> Self {
        Self {
            mask_token: DEFAULT_MASK_TOKEN.to_string(),
            ner: NerConfig::default(),
            stoplist: None,
            count_mode: CountMode::default(),
        }
    }
}

impl MaskingConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.mask_token.is_empty() {
            out.push("masking.mask_token: must not be empty".into());
        }
        if let NerConfig::Http { url, identifier } = &self.ner {
            if url.trim().is_empty() {
                out.push("masking.ner.url: must not be empty".into());
            }
            if identifier.trim().is_empty() {
                out.push("masking.ner.identifier: pin the backend identifier and version".into());
            }
        }
        out
    }
}
