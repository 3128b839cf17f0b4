use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Affiliation {
    Democrat,
    Republican,
    Independent,
    Expert,
    Tiebreaker,
}

impl Affiliation {
    pub const PARTISAN: [Affiliation; 3] = [
        Affiliation::Democrat,
        Affiliation::Republican,
        Affiliation::Independent,
    ];

    pub fn is_partisan(self) -> bool {
        Self::PARTISAN.contains(&self)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Affiliation::Democrat => "democrat",
            Affiliation::Republican => "republican",
            Affiliation::Independent => "independent",
            Affiliation::Expert => "expert",
            Affiliation::Tiebreaker => "tiebreaker",
        }
    }
}

impl fmt::Display for Affiliation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn from_bool(positive: bool) -> Self {
        if positive {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn as_int(self) -> u8 {
        match self {
            Label::Negative => 0,
            Label::Positive => 1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Label::Negative => Label::Positive,
            Label::Positive => Label::Negative,
        }
    }
}

/// One human judgement on one post.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationRecord {
    pub post_id: String,
    pub annotator_id: String,
    pub affiliation: Affiliation,
    pub label: Label,
    #[serde(default)]
    pub locations: Vec<String>,
    pub noted_at: DateTime<Utc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdjudicationMethod {
    /// Both experts gave the same label.
    ExpertAgreement,
    /// Experts split; majority of experts plus one tiebreaker.
    Tiebreak,
    /// Machine-retained post the partisan crowd voted down before it
    /// reached the experts.
    CrowdScreen,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdjudicatedLabel {
    pub post_id: String,
    pub final_label: Label,
    pub method: AdjudicationMethod,
    pub source_annotators: Vec<String>,
}

/// Sorts records into a stable order: post, time noted, annotator.
pub(crate) fn sort_records(records: &mut [&AnnotationRecord]) {
    records.sort_by(|a, b| {
        (&a.post_id, a.noted_at, &a.annotator_id).cmp(&(&b.post_id, b.noted_at, &b.annotator_id))
    });
}
