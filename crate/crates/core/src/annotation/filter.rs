use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::records::{sort_records, AdjudicatedLabel, AdjudicationMethod, AnnotationRecord, Label};

/// Crowd vote required to send a post on to the experts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HandoffPolicy {
    /// All three partisan annotators said positive.
    Unanimous,
    /// At least two of the three said positive.
    #[default]
    AtLeastTwoPositive,
}

impl HandoffPolicy {
    pub fn passes(self, positives: usize) -> bool {
        match self {
            HandoffPolicy::Unanimous => positives == 3,
            HandoffPolicy::AtLeastTwoPositive => positives >= 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterWarning {
    pub post_id: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterOutcome {
    pub post_ids: Vec<String>,
    pub warnings: Vec<FilterWarning>,
}

/// Partisan records per post for posts carrying exactly one record from
/// each partisan affiliation; other posts land in the warnings.
fn partisan_triples(
    records: &[AnnotationRecord],
) -> (BTreeMap<String, Vec<&AnnotationRecord>>, Vec<FilterWarning>) {
    let mut by_post: BTreeMap<String, Vec<&AnnotationRecord>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.affiliation.is_partisan()) {
        by_post.entry(r.post_id.clone()).or_default().push(r);
    }
    let mut warnings = Vec::new();
    by_post.retain(|post_id, rs| {
        sort_records(rs);
        let mut affs: Vec<_> = rs.iter().map(|r| r.affiliation).collect();
        affs.sort();
        affs.dedup();
        if rs.len() != 3 {
            warnings.push(FilterWarning {
                post_id: post_id.clone(),
                message: format!("expected 3 partisan records, found {}", rs.len()),
            });
            false
        } else if affs.len() != 3 {
            warnings.push(FilterWarning {
                post_id: post_id.clone(),
                message: "partisan records do not cover all three affiliations".into(),
            });
            false
        } else {
            true
        }
    });
    (by_post, warnings)
}

fn positives(rs: &[&AnnotationRecord]) -> usize {
    rs.iter().filter(|r| r.label == Label::Positive).count()
}

/// Posts whose crowd vote passes `policy`, in post id order.
pub fn handoff_filter(records: &[AnnotationRecord], policy: HandoffPolicy) -> FilterOutcome {
    let (triples, warnings) = partisan_triples(records);
    FilterOutcome {
        post_ids: triples
            .into_iter()
            .filter(|(_, rs)| policy.passes(positives(rs)))
            .map(|(id, _)| id)
            .collect(),
        warnings,
    }
}

/// Posts all three partisan annotators labeled positive.
pub fn unanimity_filter(records: &[AnnotationRecord]) -> FilterOutcome {
    handoff_filter(records, HandoffPolicy::Unanimous)
}

/// Negative labels for crowd-rated posts that fail the handoff and that a
/// majority of the crowd labeled negative. Posts failing the handoff with a
/// positive majority (possible only under `Unanimous`) get no label.
pub fn crowd_screen_negatives(
    records: &[AnnotationRecord],
    policy: HandoffPolicy,
) -> Vec<AdjudicatedLabel> {
    let (triples, _) = partisan_triples(records);
    triples
        .into_iter()
        .filter(|(_, rs)| !policy.passes(positives(rs)) && positives(rs) <= 1)
        .map(|(post_id, rs)| AdjudicatedLabel {
            post_id,
            final_label: Label::Negative,
            method: AdjudicationMethod::CrowdScreen,
            source_annotators: rs.iter().map(|r| r.annotator_id.clone()).collect(),
        })
        .collect()
}
