use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::records::{AdjudicatedLabel, AdjudicationMethod, Label};
use crate::corpus::{Partition, Platform, Post};
use crate::jsonl::{self, JsonlError};

/// Classifier-ready post with its final label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub post_id: String,
    pub platform: Platform,
    pub partition: Partition,
    pub text: String,
    /// Text with locations replaced; filled by the masking step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub masked_text: Option<String>,
    /// Location surfaces found by the masking step.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub locations: Vec<String>,
    /// 1 = expresses a concern, 0 = does not.
    pub label: u8,
    pub method: AdjudicationMethod,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub positives: usize,
    pub negatives: usize,
    pub total: usize,
}

impl DatasetSummary {
    pub fn of(examples: &[LabeledExample]) -> Self {
        let positives = examples.iter().filter(|e| e.label == 1).count();
        Self {
            positives,
            negatives: examples.len() - positives,
            total: examples.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExportError {
    #[error("adjudicated posts missing from corpus: {0:?}")]
    Dangling(Vec<String>),
    #[error("posts adjudicated more than once: {0:?}")]
    Conflicting(Vec<String>),
}

/// Joins final labels with their posts, in post id order.
pub fn export_labeled(
    adjudicated: &[AdjudicatedLabel],
    corpus: &[Post],
) -> Result<Vec<LabeledExample>, ExportError> {
    let posts: BTreeMap<&str, &Post> = corpus.iter().map(|p| (p.post_id.as_str(), p)).collect();
    let mut seen = BTreeSet::new();
    let repeated: BTreeSet<String> = adjudicated
        .iter()
        .filter(|a| !seen.insert(a.post_id.as_str()))
        .map(|a| a.post_id.clone())
        .collect();
    if !repeated.is_empty() {
        return Err(ExportError::Conflicting(repeated.into_iter().collect()));
    }
    let dangling: Vec<String> = adjudicated
        .iter()
        .filter(|a| !posts.contains_key(a.post_id.as_str()))
        .map(|a| a.post_id.clone())
        .collect();
    if !dangling.is_empty() {
        return Err(ExportError::Dangling(dangling));
    }
    let mut out: Vec<LabeledExample> = adjudicated
        .iter()
        .map(|a| {
            let p = posts[a.post_id.as_str()];
            LabeledExample {
                post_id: p.post_id.clone(),
                platform: p.platform,
                partition: p.partition,
                text: p.text.clone(),
                masked_text: None,
                locations: Vec::new(),
                label: u8::from(a.final_label == Label::Positive),
                method: a.method,
            }
        })
        .collect();
    out.sort_by(|a, b| a.post_id.cmp(&b.post_id));
    Ok(out)
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Vec<LabeledExample>, JsonlError> {
    jsonl::read_jsonl(path)
}

pub fn write_dataset(
    path: impl AsRef<Path>,
    examples: &[LabeledExample],
) -> Result<(), JsonlError> {
    jsonl::write_jsonl(path, examples)
}
