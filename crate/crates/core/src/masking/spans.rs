use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityCategory {
    Location,
    Geopolitical,
}

impl EntityCategory {
    /// Maps NER labels (spaCy-style `LOC`/`GPE` or spelled-out names) onto
    /// the categories masking cares about. Other labels map to `None`.
    pub fn from_label(label: &str) -> Option<Self> {
        match label.to_ascii_uppercase().as_str() {
            "LOC" | "LOCATION" => Some(EntityCategory::Location),
            "GPE" | "GEOPOLITICAL" => Some(EntityCategory::Geopolitical),
            _ => None,
        }
    }
}

/// A location mention; offsets are in Unicode scalar values (codepoints),
/// end-exclusive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EntitySpan {
    pub start: usize,
    pub end: usize,
    pub surface: String,
    pub category: EntityCategory,
}

/// Output of [`mask_locations`](super::mask_locations).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskedText {
    pub text: String,
    pub mask_token: String,
    /// Number of merged regions replaced by the token.
    pub span_count: usize,
}

pub(crate) fn char_len(s: &str) -> usize {
    s.chars().count()
}

/// Byte offset of every codepoint boundary, including the end.
pub(crate) fn boundaries(s: &str) -> Vec<usize> {
    s.char_indices().map(|(b, _)| b).chain([s.len()]).collect()
}
