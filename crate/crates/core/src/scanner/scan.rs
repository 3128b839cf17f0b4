use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::report::{
    EstimatedMetrics, FlaggedPost, ModelRef, ScanErrorItem, ScanPrediction, ScanReport,
};
use crate::annotation::{AnnotationRecord, Label};
use crate::classifier::{
    compute_macro_metrics, Classifier, ClassifierError, MaskingVariant, MetricsError, ModelArtifact,
};
use crate::corpus::Post;
use crate::hashing::json_hash;
use crate::masking::{extract_locations_with, mask_text, NerBackend};

pub const ESTIMATE_KIND: &str = "audit_sample_estimate";

#[derive(Debug, thiserror::Error)]
pub enum ScanError {
    #[error("mask policy {requested} does not match the model's training variant {trained}")]
    MaskPolicy {
        requested: MaskingVariant,
        trained: MaskingVariant,
    },
    #[error(transparent)]
    Model(#[from] ClassifierError),
    #[error("requested {requested_pos} positives / {requested_neg} negatives, but only {available_pos} / {available_neg} are available")]
    OversizedAudit {
        requested_pos: usize,
        requested_neg: usize,
        available_pos: usize,
        available_neg: usize,
    },
    #[error("audit items without a human label: {0:?}")]
    Unlabeled(Vec<String>),
    #[error("no audit sample drawn yet")]
    NoAudit,
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// A loaded classifier and the reference recorded in scan reports.
pub struct ScanModel {
    pub reference: ModelRef,
    pub classifier: Box<dyn Classifier>,
}

impl ScanModel {
    /// Uses the artifact's first run.
    pub fn from_artifact(artifact: &ModelArtifact) -> Result<Self, ClassifierError> {
        Ok(Self {
            reference: ModelRef {
                model_identifier: artifact.model_identifier.clone(),
                artifact_id: Some(artifact.artifact_id.clone()),
                masking: artifact.masking,
                run: 0,
            },
            classifier: artifact.classifier(0)?,
        })
    }
}

pub struct ScanOptions<'a> {
    pub masking: MaskingVariant,
    pub mask_token: &'a str,
    pub ner: &'a dyn NerBackend,
    pub created_at: DateTime<Utc>,
}

/// Hash of a corpus's identity and text, independent of order.
pub fn corpus_hash(corpus: &[Post]) -> String {
    let mut rows: Vec<(&str, &str)> = corpus
        .iter()
        .map(|p| (p.post_id.as_str(), p.text.as_str()))
        .collect();
    rows.sort();
    json_hash(&rows)
}

/// Queue order: score descending, then post id ascending.
pub fn queue_order(a: &FlaggedPost, b: &FlaggedPost) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.post_id.cmp(&b.post_id))
}

/// Classifies every post once. Posts the model or NER fails on are listed
/// as scan errors and left out of the counts.
pub fn scan(
    corpus: &[Post],
    model: &ScanModel,
    options: &ScanOptions<'_>,
) -> Result<ScanReport, ScanError> {
    if options.masking != model.reference.masking {
        return Err(ScanError::MaskPolicy {
            requested: options.masking,
            trained: model.reference.masking,
        });
    }
    let mut posts: Vec<&Post> = corpus.iter().collect();
    posts.sort_by(|a, b| a.post_id.cmp(&b.post_id));

    let mut predictions = Vec::new();
    let mut flagged = Vec::new();
    let mut errors = Vec::new();
    for post in posts {
        let outcome = (|| -> Result<Option<FlaggedPost>, String> {
            let input = match options.masking {
                MaskingVariant::Mask => {
                    mask_text(&post.text, options.ner, options.mask_token)
                        .map_err(|e| e.to_string())?
                        .0
                        .text
                }
                MaskingVariant::Nomask => post.text.clone(),
            };
            let p = model.classifier.predict(&input).map_err(|e| e.message)?;
            predictions.push(ScanPrediction {
                post_id: post.post_id.clone(),
                label: p.label,
                score: p.score,
            });
            if p.label != 1 {
                return Ok(None);
            }
            let locations = extract_locations_with(&post.text, options.ner, options.mask_token)
                .map_err(|e| e.to_string())?;
            Ok(Some(FlaggedPost {
                post_id: post.post_id.clone(),
                score: p.score,
                platform: post.platform,
                partition: post.partition,
                text: post.text.clone(),
                locations,
            }))
        })();
        match outcome {
            Ok(Some(f)) => flagged.push(f),
            Ok(None) => {}
            Err(message) => {
                // A location lookup failure after a positive prediction
                // still removes the post from the counts.
                if predictions.last().map(|p| &p.post_id) == Some(&post.post_id) {
                    predictions.pop();
                }
                errors.push(ScanErrorItem {
                    post_id: post.post_id.clone(),
                    message,
                });
            }
        }
    }
    flagged.sort_by(queue_order);
    let n_positive = predictions.iter().filter(|p| p.label == 1).count();
    let corpus_hash = corpus_hash(corpus);
    let scan_id = json_hash(&(
        &corpus_hash,
        &model.reference,
        options.masking,
        options.created_at,
    ))[..16]
        .to_string();
    Ok(ScanReport {
        scan_id,
        corpus_hash,
        model: model.reference.clone(),
        created_at: options.created_at,
        n_scanned: corpus.len(),
        n_positive,
        n_negative: predictions.len() - n_positive,
        scan_errors: errors,
        flagged,
        predictions,
        audit_pos_sample: Vec::new(),
        audit_neg_sample: Vec::new(),
        audit_seed: None,
        estimated_metrics: None,
    })
}

fn draw(ids: &[&str], n: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut out: Vec<String> = rand::seq::index::sample(rng, ids.len(), n)
        .into_iter()
        .map(|i| ids[i].to_string())
        .collect();
    out.sort();
    out
}

/// Draws uniform samples without replacement from the predicted positives
/// and negatives. Replaces any earlier sample and clears the estimate.
pub fn sample_audit(
    report: &mut ScanReport,
    n_pos: usize,
    n_neg: usize,
    seed: u64,
) -> Result<(), ScanError> {
    let by_label = |label: u8| -> Vec<&str> {
        report
            .predictions
            .iter()
            .filter(|p| p.label == label)
            .map(|p| p.post_id.as_str())
            .collect()
    };
    let (pos, neg) = (by_label(1), by_label(0));
    if n_pos > pos.len() || n_neg > neg.len() {
        return Err(ScanError::OversizedAudit {
            requested_pos: n_pos,
            requested_neg: n_neg,
            available_pos: pos.len(),
            available_neg: neg.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pos_sample = draw(&pos, n_pos, &mut rng);
    let neg_sample = draw(&neg, n_neg, &mut rng);
    report.audit_pos_sample = pos_sample;
    report.audit_neg_sample = neg_sample;
    report.audit_seed = Some(seed);
    report.estimated_metrics = None;
    Ok(())
}

/// Human audit labels keyed by post id, taking each post's earliest record.
pub fn audit_labels_from_records(records: &[AnnotationRecord]) -> BTreeMap<String, u8> {
    let mut sorted: Vec<&AnnotationRecord> = records.iter().collect();
    sorted.sort_by(|a, b| (a.noted_at, &a.annotator_id).cmp(&(b.noted_at, &b.annotator_id)));
    let mut out = BTreeMap::new();
    for r in sorted {
        out.entry(r.post_id.clone())
            .or_insert(u8::from(r.label == Label::Positive));
    }
    out
}

/// Macro metrics over the audit sample: predictions are the sampled
/// classes, golds the human labels.
pub fn estimate_wild_metrics(
    report: &mut ScanReport,
    labels: &BTreeMap<String, u8>,
) -> Result<(), ScanError> {
    if report.audit_pos_sample.is_empty() && report.audit_neg_sample.is_empty() {
        return Err(ScanError::NoAudit);
    }
    let audit: Vec<(&String, u8)> = report
        .audit_pos_sample
        .iter()
        .map(|id| (id, 1))
        .chain(report.audit_neg_sample.iter().map(|id| (id, 0)))
        .collect();
    let unlabeled: BTreeSet<String> = audit
        .iter()
        .filter(|(id, _)| !labels.contains_key(*id))
        .map(|(id, _)| (*id).clone())
        .collect();
    if !unlabeled.is_empty() {
        return Err(ScanError::Unlabeled(unlabeled.into_iter().collect()));
    }
    let preds: Vec<u8> = audit.iter().map(|(_, p)| *p).collect();
    let golds: Vec<u8> = audit.iter().map(|(id, _)| labels[*id]).collect();
    let out = compute_macro_metrics(&preds, &golds)?;
    report.estimated_metrics = Some(EstimatedMetrics {
        kind: ESTIMATE_KIND.to_string(),
        metrics: out.metrics,
        confusion: out.confusion,
        n_positive_sample: report.audit_pos_sample.len(),
        n_negative_sample: report.audit_neg_sample.len(),
    });
    Ok(())
}
