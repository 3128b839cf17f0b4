use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::classifier::{ConfusionMatrix, MacroMetrics, MaskingVariant};
use crate::corpus::{Partition, Platform};
use crate::masking::EntitySpan;

/// The model a scan used.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelRef {
    pub model_identifier: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub artifact_id: Option<String>,
    pub masking: MaskingVariant,
    /// Which of the artifact's runs classified the corpus.
    pub run: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPrediction {
    pub post_id: String,
    pub label: u8,
    pub score: f64,
}

/// A positive prediction, with what a reviewer needs to route it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlaggedPost {
    pub post_id: String,
    pub score: f64,
    pub platform: Platform,
    pub partition: Partition,
    pub text: String,
    /// Location mentions in `text` (codepoint offsets).
    pub locations: Vec<EntitySpan>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanErrorItem {
    pub post_id: String,
    pub message: String,
}

/// Audit-sample estimate of in-the-wild performance. Sample sizes are
/// reported alongside; nothing is extrapolated to the full corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatedMetrics {
    pub kind: String,
    pub metrics: MacroMetrics,
    pub confusion: ConfusionMatrix,
    pub n_positive_sample: usize,
    pub n_negative_sample: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub scan_id: String,
    pub corpus_hash: String,
    pub model: ModelRef,
    pub created_at: DateTime<Utc>,
    pub n_scanned: usize,
    pub n_positive: usize,
    pub n_negative: usize,
    #[serde(default)]
    pub scan_errors: Vec<ScanErrorItem>,
    /// Positives in queue order: score descending, then post id.
    pub flagged: Vec<FlaggedPost>,
    /// Every successful prediction, in post id order.
    pub predictions: Vec<ScanPrediction>,
    #[serde(default)]
    pub audit_pos_sample: Vec<String>,
    #[serde(default)]
    pub audit_neg_sample: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimated_metrics: Option<EstimatedMetrics>,
}

/// Listing entry for a stored scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub scan_id: String,
    pub created_at: DateTime<Utc>,
    pub model: ModelRef,
    pub n_scanned: usize,
    pub n_positive: usize,
    pub n_negative: usize,
    pub n_errors: usize,
    pub n_audit: usize,
    pub has_estimate: bool,
}

impl ScanReport {
    pub fn summary(&self) -> ScanSummary {
        ScanSummary {
            scan_id: self.scan_id.clone(),
            created_at: self.created_at,
            model: self.model.clone(),
            n_scanned: self.n_scanned,
            n_positive: self.n_positive,
            n_negative: self.n_negative,
            n_errors: self.scan_errors.len(),
            n_audit: self.audit_pos_sample.len() + self.audit_neg_sample.len(),
            has_estimate: self.estimated_metrics.is_some(),
        }
    }

    pub fn prediction(&self, post_id: &str) -> Option<&ScanPrediction> {
        self.predictions
            .binary_search_by(|p| p.post_id.as_str().cmp(post_id))
            .ok()
            .map(|i| &self.predictions[i])
    }
}
