//! Inference backends: the NLI and generative interfaces, HTTP clients for
//! served models, deterministic rule-based stand-ins, and a replay cache.

mod http;
mod replay;
mod rule;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use http::{HttpGenerative, HttpNli};
pub use replay::{CachedResponse, RecordingGenerative, RecordingNli, ReplayCache, ReplayMode};
pub use rule::{ResponseStyle, RuleAnnotator, RuleNli, FUTURE_CUES, NLI_CUES, REFUSAL_MARKER};

use crate::cascade::GenerationParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Nli,
    Generative,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{message}")]
pub struct BackendError {
    pub message: String,
    pub retriable: bool,
}

impl BackendError {
    pub fn retriable(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            retriable: true,
        }
    }

    pub fn fatal(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            retriable: false,
        }
    }
}

/// Entailment / contradiction / neutral probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NliScores {
    pub entailment: f64,
    pub contradiction: f64,
    pub neutral: f64,
}

impl NliScores {
    pub const SUM_TOLERANCE: f64 = 1e-6;

    /// Checks that the triple is a probability distribution.
    pub fn validate(&self) -> Result<(), BackendError> {
        let parts = [self.entailment, self.contradiction, self.neutral];
        if parts.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(BackendError::fatal(format!(
                "nli scores out of [0,1]: {self:?}"
            )));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(BackendError::fatal(format!(
                "nli scores sum to {sum}, not 1"
            )));
        }
        Ok(())
    }
}

pub trait NliBackend: Send + Sync {
    fn model_identifier(&self) -> &str;

    /// Longest premise in characters the model accepts.
    fn max_premise_chars(&self) -> Option<usize> {
        None
    }

    fn infer(&self, premise: &str, hypothesis: &str) -> Result<NliScores, BackendError>;
}

pub trait GenerativeBackend: Send + Sync {
    fn model_identifier(&self) -> &str;

    fn generate(&self, prompt: &str, params: &GenerationParams) -> Result<String, BackendError>;

    /// Generation for the `attempt`-th try of the same prompt (0-based).
    /// Recording wrappers key on the attempt so a recorded retry replays
    /// the retry's answer rather than the first one.
    fn generate_attempt(
        &self,
        prompt: &str,
        params: &GenerationParams,
        attempt: u32,
    ) -> Result<String, BackendError> {
        let _ = attempt;
        self.generate(prompt, params)
    }
}

/// A configured backend of either kind.
#[derive(Clone)]
pub enum InferenceBackend {
    Nli(Arc<dyn NliBackend>),
    Generative(Arc<dyn GenerativeBackend>),
}

impl InferenceBackend {
    pub fn kind(&self) -> BackendKind {
        match self {
            InferenceBackend::Nli(_) => BackendKind::Nli,
            InferenceBackend::Generative(_) => BackendKind::Generative,
        }
    }

    pub fn model_identifier(&self) -> &str {
        match self {
            InferenceBackend::Nli(b) => b.model_identifier(),
            InferenceBackend::Generative(b) => b.model_identifier(),
        }
    }
}
