use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::{MaskingVariant, TrainConfig};
use crate::annotation::LabeledExample;
use crate::hashing::json_hash;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: u8,
    /// Positive-class score in [0,1].
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{message}")]
pub struct ClassifierError {
    pub message: String,
}

impl ClassifierError {
    pub fn new(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
        }
    }
}

pub trait Classifier: Send + Sync {
    fn predict(&self, text: &str) -> Result<Prediction, ClassifierError>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainExample {
    pub text: String,
    pub label: u8,
}

/// Training outcome of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunArtifact {
    pub run: usize,
    pub seed: u64,
    pub loss_log: Vec<f64>,
    /// Backend-specific parameters.
    pub weights: Value,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("training failed: {message}")]
pub struct TrainError {
    pub message: String,
    /// Per-epoch losses recorded before the failure.
    pub partial_log: Vec<f64>,
}

/// A trainable model family keyed by model identifier.
pub trait TrainBackend: Send + Sync {
    fn model_identifier(&self) -> &str;

    fn train(
        &self,
        examples: &[TrainExample],
        config: &TrainConfig,
        seed: u64,
    ) -> Result<(Value, Vec<f64>), TrainError>;

    fn load(&self, weights: &Value) -> Result<Box<dyn Classifier>, ClassifierError>;
}

/// A trained model: one parameter set per evaluation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub artifact_id: String,
    pub model_identifier: String,
    pub masking: MaskingVariant,
    pub config: TrainConfig,
    pub dataset_hash: String,
    pub manifest_hash: String,
    pub runs: Vec<RunArtifact>,
}

impl ModelArtifact {
    pub(crate) fn identify(mut self) -> Self {
        self.artifact_id.clear();
        self.artifact_id = json_hash(&self)[..16].to_string();
        self
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ClassifierError> {
        let p = path.as_ref();
        let body = std::fs::read_to_string(p)
            .map_err(|e| ClassifierError::new(format!("{}: {e}", p.display())))?;
        serde_json::from_str(&body)
            .map_err(|e| ClassifierError::new(format!("{}: {e}", p.display())))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ClassifierError> {
        let p = path.as_ref();
        let body = serde_json::to_string(self).expect("artifact serializes") + "\n";
        std::fs::write(p, body).map_err(|e| ClassifierError::new(format!("{}: {e}", p.display())))
    }

    /// Classifier for run `i`.
    pub fn classifier(&self, i: usize) -> Result<Box<dyn Classifier>, ClassifierError> {
        let run = self
            .runs
            .get(i)
            .ok_or_else(|| ClassifierError::new(format!("artifact has no run {i}")))?;
        let backend = super::train_backend(&self.model_identifier).ok_or_else(|| {
            ClassifierError::new(format!("no backend for model {:?}", self.model_identifier))
        })?;
        backend.load(&run.weights)
    }
}

/// The text a model sees for an example under `masking`.
pub fn model_input(
    example: &LabeledExample,
    masking: MaskingVariant,
) -> Result<&str, ClassifierError> {
    match masking {
        MaskingVariant::Nomask => Ok(&example.text),
        MaskingVariant::Mask => example.masked_text.as_deref().ok_or_else(|| {
            ClassifierError::new(format!(
                "example {} has no masked text; run the masking step first",
                example.post_id
            ))
        }),
    }
}
