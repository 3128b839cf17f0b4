use serde::{Deserialize, Serialize};

use super::mask::mask_text;
use super::ner::{NerBackend, NerError};
use crate::annotation::LabeledExample;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskSummary {
    pub examples: usize,
    pub examples_with_locations: usize,
    pub masked_regions: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("masking {post_id}: {source}")]
pub struct DatasetMaskError {
    pub post_id: String,
    pub source: NerError,
}

/// Fills `masked_text` and `locations` for every example.
pub fn mask_examples(
    examples: &mut [LabeledExample],
    ner: &dyn NerBackend,
    mask_token: &str,
) -> Result<MaskSummary, DatasetMaskError> {
    let mut summary = MaskSummary {
        examples: examples.len(),
        ..Default::default()
    };
    for e in examples.iter_mut() {
        let (masked, spans) =
            mask_text(&e.text, ner, mask_token).map_err(|source| DatasetMaskError {
                post_id: e.post_id.clone(),
                source,
            })?;
        summary.masked_regions += masked.span_count;
        if !spans.is_empty() {
            summary.examples_with_locations += 1;
        }
        e.masked_text = Some(masked.text);
        e.locations = spans.into_iter().map(|s| s.surface).collect();
    }
    Ok(summary)
}
