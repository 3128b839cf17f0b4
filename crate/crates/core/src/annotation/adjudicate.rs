use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::records::{
    sort_records, AdjudicatedLabel, AdjudicationMethod, Affiliation, AnnotationRecord, Label,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
pub enum AdjudicationError {
    #[error("post {post_id}: expected 2 expert records, found {found}")]
    ExpertCount { post_id: String, found: usize },
    #[error("post {post_id}: record by {annotator_id} is {affiliation}, not {expected}")]
    WrongAffiliation {
        post_id: String,
        annotator_id: String,
        affiliation: Affiliation,
        expected: Affiliation,
    },
}

/// A split awaiting its tiebreaker.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PendingDispute {
    pub post_id: String,
    pub expert_labels: Vec<(String, Label)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Adjudication {
    Final(AdjudicatedLabel),
    Pending(PendingDispute),
}

/// Resolves one post from its two expert records and any tiebreaker
/// records. Split experts with no usable tiebreaker stay pending; the
/// earliest tiebreaker (by time, then id) who is not one of the experts
/// casts the deciding vote.
pub fn adjudicate(
    experts: &[AnnotationRecord],
    tiebreakers: &[AnnotationRecord],
) -> Result<Adjudication, AdjudicationError> {
    let post_id = experts
        .first()
        .map(|r| r.post_id.clone())
        .unwrap_or_default();
    if experts.len() != 2 {
        return Err(AdjudicationError::ExpertCount {
            post_id,
            found: experts.len(),
        });
    }
    let check = |r: &AnnotationRecord, expected: Affiliation| {
        if r.affiliation == expected {
            Ok(())
        } else {
            Err(AdjudicationError::WrongAffiliation {
                post_id: r.post_id.clone(),
                annotator_id: r.annotator_id.clone(),
                affiliation: r.affiliation,
                expected,
            })
        }
    };
    for r in experts {
        check(r, Affiliation::Expert)?;
    }
    if experts[1].post_id != post_id || experts[0].annotator_id == experts[1].annotator_id {
        return Err(AdjudicationError::ExpertCount { post_id, found: 1 });
    }
    for r in tiebreakers {
        check(r, Affiliation::Tiebreaker)?;
    }

    let mut pair: Vec<&AnnotationRecord> = experts.iter().collect();
    sort_records(&mut pair);
    let source: Vec<String> = pair.iter().map(|r| r.annotator_id.clone()).collect();
    if pair[0].label == pair[1].label {
        return Ok(Adjudication::Final(AdjudicatedLabel {
            post_id,
            final_label: pair[0].label,
            method: AdjudicationMethod::ExpertAgreement,
            source_annotators: source,
        }));
    }
    let mut tbs: Vec<&AnnotationRecord> = tiebreakers
        .iter()
        .filter(|t| t.post_id == post_id && !source.contains(&t.annotator_id))
        .collect();
    sort_records(&mut tbs);
    match tbs.first() {
        // With the experts split, the tiebreaker's label is the majority.
        Some(t) => Ok(Adjudication::Final(AdjudicatedLabel {
            post_id,
            final_label: t.label,
            method: AdjudicationMethod::Tiebreak,
            source_annotators: source
                .into_iter()
                .chain(std::iter::once(t.annotator_id.clone()))
                .collect(),
        })),
        None => Ok(Adjudication::Pending(PendingDispute {
            post_id,
            expert_labels: pair
                .iter()
                .map(|r| (r.annotator_id.clone(), r.label))
                .collect(),
        })),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdjudicationBatch {
    pub labels: Vec<AdjudicatedLabel>,
    pub pending: Vec<PendingDispute>,
    pub errors: Vec<AdjudicationError>,
}

/// Adjudicates every post carrying expert records, in post id order.
pub fn adjudicate_all(records: &[AnnotationRecord]) -> AdjudicationBatch {
    let mut experts: BTreeMap<&str, Vec<AnnotationRecord>> = BTreeMap::new();
    let mut tiebreakers: BTreeMap<&str, Vec<AnnotationRecord>> = BTreeMap::new();
    for r in records {
        match r.affiliation {
            Affiliation::Expert => experts.entry(&r.post_id).or_default().push(r.clone()),
            Affiliation::Tiebreaker => tiebreakers.entry(&r.post_id).or_default().push(r.clone()),
            _ => {}
        }
    }
    let mut out = AdjudicationBatch::default();
    for (post, ex) in &experts {
        let tb = tiebreakers.get(post).map(Vec::as_slice).unwrap_or_default();
        match adjudicate(ex, tb) {
            Ok(Adjudication::Final(l)) => out.labels.push(l),
            Ok(Adjudication::Pending(p)) => out.pending.push(p),
            Err(e) => out.errors.push(e),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::test_support::rec;
    use Affiliation::{Expert, Tiebreaker};
    use Label::{Negative as N, Positive as P};

    fn experts(a: Label, b: Label) -> Vec<AnnotationRecord> {
        vec![rec("p", "e1", Expert, a), rec("p", "e2", Expert, b)]
    }

    #[test]
    fn agreement() {
        match adjudicate(&experts(P, P), &[]).unwrap() {
            Adjudication::Final(l) => {
                assert_eq!(l.final_label, P);
                assert_eq!(l.method, AdjudicationMethod::ExpertAgreement);
                assert_eq!(l.source_annotators.len(), 2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn tiebreak_majority() {
        let tb = vec![rec("p", "t", Tiebreaker, N)];
        match adjudicate(&experts(P, N), &tb).unwrap() {
            Adjudication::Final(l) => {
                assert_eq!(l.final_label, N);
                assert_eq!(l.method, AdjudicationMethod::Tiebreak);
                assert_eq!(l.source_annotators, vec!["e1", "e2", "t"]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn split_without_tiebreaker_pending() {
        assert!(matches!(
            adjudicate(&experts(P, N), &[]).unwrap(),
            Adjudication::Pending(_)
        ));
    }

    #[test]
    fn wrong_counts_rejected() {
        let one = vec![rec("p", "e1", Expert, P)];
        assert!(adjudicate(&one, &[]).is_err());
        let same = vec![rec("p", "e1", Expert, P), rec("p", "e1", Expert, N)];
        assert!(adjudicate(&same, &[]).is_err());
    }

    #[test]
    fn batch() {
        let mut records = experts(P, N);
        records.push(rec("q", "e1", Expert, N));
        records.push(rec("q", "e2", Expert, N));
        records.push(rec("r", "e1", Expert, P));
        let out = adjudicate_all(&records);
        assert_eq!(out.labels.len(), 1);
        assert_eq!(out.pending.len(), 1);
        assert_eq!(out.errors.len(), 1);
    }
}
