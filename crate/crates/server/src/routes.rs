use std::collections::BTreeMap;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use ombudsman_core::annotation::{
    adjudicate, adjudicate_all, agreement_report, Adjudication, AdjudicationBatch, Affiliation,
    AgreementReport, AnnotationRecord, Label, RaterGroup, StoreError,
};
use ombudsman_core::corpus::{Partition, Platform};
use ombudsman_core::masking::EntitySpan;
use ombudsman_core::scanner::{EstimatedMetrics, ScanReport, ScanStoreError, ScanSummary};

use crate::error::ApiError;
use crate::state::AppState;

type Shared = Arc<AppState>;

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/queue", get(annotation_queue))
        .route("/api/labels", post(submit_label))
        .route("/api/agreement", get(agreement))
        .route("/api/disputes", get(disputes))
        .route("/api/adjudications", get(adjudications))
        .route("/api/scans", get(list_scans))
        .route("/api/scans/{id}/queue", get(scan_queue))
        .route("/api/scans/{id}/report", get(scan_report))
        .route("/api/scans/{id}/audit", get(scan_audit))
        .with_state(state)
}

fn scan_error(e: ScanStoreError) -> ApiError {
    match e {
        ScanStoreError::NotFound(_) | ScanStoreError::BadId(_) => ApiError::NotFound(e.to_string()),
        ScanStoreError::Io { .. } => ApiError::Internal(e.to_string()),
    }
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({"status": "ok"}))
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum LabelState {
    #[default]
    All,
    Labeled,
    Unlabeled,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct QueueParams {
    #[serde(default)]
    offset: usize,
    limit: Option<usize>,
    #[serde(default)]
    label_state: LabelState,
    platform: Option<Platform>,
    annotator: Option<String>,
}

const DEFAULT_PAGE: usize = 50;
const MAX_PAGE: usize = 500;

#[derive(Debug, Serialize)]
struct Page<T> {
    total: usize,
    offset: usize,
    limit: usize,
    items: Vec<T>,
}

fn paginate<T>(items: Vec<T>, params: &QueueParams) -> Page<T> {
    let limit = params.limit.unwrap_or(DEFAULT_PAGE).clamp(1, MAX_PAGE);
    let total = items.len();
    let items = items.into_iter().skip(params.offset).take(limit).collect();
    Page {
        total,
        offset: params.offset,
        limit,
        items,
    }
}

/// Labels on a post as seen by `annotator`: peers' labels stay hidden
/// until the annotator has submitted their own.
fn visible_labels(
    labels: Vec<AnnotationRecord>,
    annotator: Option<&str>,
) -> (Vec<AnnotationRecord>, bool) {
    match annotator {
        Some(a) if !labels.iter().any(|r| r.annotator_id == a) => (Vec::new(), !labels.is_empty()),
        _ => (labels, false),
    }
}

fn keep(labels: &[AnnotationRecord], params: &QueueParams) -> bool {
    let labeled = match params.annotator.as_deref() {
        Some(a) => labels.iter().any(|r| r.annotator_id == a),
        None => !labels.is_empty(),
    };
    match params.label_state {
        LabelState::All => true,
        LabelState::Labeled => labeled,
        LabelState::Unlabeled => !labeled,
    }
}

fn labels_by_post(state: &AppState) -> BTreeMap<String, Vec<AnnotationRecord>> {
    let mut out: BTreeMap<String, Vec<AnnotationRecord>> = BTreeMap::new();
    for r in state.annotations.records() {
        out.entry(r.post_id.clone()).or_default().push(r);
    }
    out
}

#[derive(Debug, Serialize)]
struct AnnotationQueueItem {
    post_id: String,
    platform: Platform,
    partition: Partition,
    #[serde(skip_serializing_if = "Option::is_none")]
    container_title: Option<String>,
    text: String,
    labels: Vec<AnnotationRecord>,
    labels_hidden: bool,
}

async fn annotation_queue(
    State(state): State<Shared>,
    Query(params): Query<QueueParams>,
) -> Json<Page<AnnotationQueueItem>> {
    let mut labels = labels_by_post(&state);
    let items = state
        .posts
        .values()
        .filter(|p| params.platform.is_none_or(|pl| p.platform == pl))
        .filter_map(|p| {
            let all = labels.remove(&p.post_id).unwrap_or_default();
            if !keep(&all, &params) {
                return None;
            }
            let (labels, labels_hidden) = visible_labels(all, params.annotator.as_deref());
            Some(AnnotationQueueItem {
                post_id: p.post_id.clone(),
                platform: p.platform,
                partition: p.partition,
                container_title: p.container_title.clone(),
                text: p.text.clone(),
                labels,
                labels_hidden,
            })
        })
        .collect();
    Json(paginate(items, &params))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LabelSubmission {
    post_id: String,
    annotator_id: String,
    affiliation: Affiliation,
    label: Label,
    #[serde(default)]
    locations: Vec<String>,
    noted_at: Option<DateTime<Utc>>,
}

#[derive(Debug, Serialize)]
struct LabelAccepted {
    record: AnnotationRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    adjudication: Option<Adjudication>,
}

fn known_post(state: &AppState, post_id: &str) -> Result<bool, ApiError> {
    if state.posts.contains_key(post_id) {
        return Ok(true);
    }
    for summary in state.scans.list().map_err(scan_error)? {
        let report = state.scans.get(&summary.scan_id).map_err(scan_error)?;
        if report.prediction(post_id).is_some() {
            return Ok(true);
        }
    }
    Ok(false)
}

fn by_affiliation(records: &[AnnotationRecord], a: Affiliation) -> Vec<AnnotationRecord> {
    records
        .iter()
        .filter(|r| r.affiliation == a)
        .cloned()
        .collect()
}

/// Adjudication of a post once both expert labels are in.
fn post_adjudication(records: &[AnnotationRecord]) -> Option<Adjudication> {
    let experts = by_affiliation(records, Affiliation::Expert);
    if experts.len() != 2 {
        return None;
    }
    adjudicate(&experts, &by_affiliation(records, Affiliation::Tiebreaker)).ok()
}

async fn submit_label(
    State(state): State<Shared>,
    body: String,
) -> Result<(StatusCode, Json<LabelAccepted>), ApiError> {
    let sub: LabelSubmission = serde_json::from_str(&body)
        .map_err(|e| ApiError::BadRequest(format!("invalid label submission: {e}")))?;
    if sub.annotator_id.trim().is_empty() {
        return Err(ApiError::BadRequest(
            "annotator_id must not be empty".into(),
        ));
    }
    if !known_post(&state, &sub.post_id)? {
        return Err(ApiError::NotFound(format!("unknown post {}", sub.post_id)));
    }
    let record = AnnotationRecord {
        post_id: sub.post_id,
        annotator_id: sub.annotator_id,
        affiliation: sub.affiliation,
        label: sub.label,
        locations: sub.locations,
        noted_at: sub.noted_at.unwrap_or_else(|| (state.clock)()),
    };

    let _guard = state.write_lock.lock().expect("write lock");
    let existing = state.annotations.for_post(&record.post_id);
    if existing
        .iter()
        .any(|r| r.annotator_id == record.annotator_id)
    {
        return Err(ApiError::Conflict(format!(
            "annotator {} already labeled {}",
            record.annotator_id, record.post_id
        )));
    }
    match record.affiliation {
        Affiliation::Expert if by_affiliation(&existing, Affiliation::Expert).len() >= 2 => {
            return Err(ApiError::Conflict(format!(
                "{} already has two expert labels",
                record.post_id
            )));
        }
        Affiliation::Tiebreaker
            if !matches!(post_adjudication(&existing), Some(Adjudication::Pending(_))) =>
        {
            return Err(ApiError::Conflict(format!(
                "{} has no open expert dispute",
                record.post_id
            )));
        }
        _ => {}
    }
    state
        .annotations
        .insert(record.clone())
        .map_err(|e| match e {
            StoreError::Duplicate { .. } => ApiError::Conflict(e.to_string()),
            StoreError::Io(_) => ApiError::Internal(e.to_string()),
        })?;
    let mut all = existing;
    all.push(record.clone());
    Ok((
        StatusCode::CREATED,
        Json(LabelAccepted {
            record,
            adjudication: post_adjudication(&all),
        }),
    ))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AgreementParams {
    group: Option<RaterGroup>,
}

async fn agreement(
    State(state): State<Shared>,
    Query(params): Query<AgreementParams>,
) -> Json<AgreementReport> {
    let group = params.group.unwrap_or(RaterGroup::Partisan);
    Json(agreement_report(&state.annotations.records(), group))
}

#[derive(Debug, Serialize)]
struct DisputeView {
    post_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    text: Option<String>,
    expert_labels: Vec<(String, Label)>,
}

async fn disputes(State(state): State<Shared>) -> Json<Vec<DisputeView>> {
    let batch = adjudicate_all(&state.annotations.records());
    Json(
        batch
            .pending
            .into_iter()
            .map(|d| DisputeView {
                text: state.posts.get(&d.post_id).map(|p| p.text.clone()),
                post_id: d.post_id,
                expert_labels: d.expert_labels,
            })
            .collect(),
    )
}

async fn adjudications(State(state): State<Shared>) -> Json<AdjudicationBatch> {
    Json(adjudicate_all(&state.annotations.records()))
}

async fn list_scans(State(state): State<Shared>) -> Result<Json<Vec<ScanSummary>>, ApiError> {
    Ok(Json(state.scans.list().map_err(scan_error)?))
}

async fn scan_report(
    State(state): State<Shared>,
    Path(id): Path<String>,
) -> Result<Json<ScanReport>, ApiError> {
    Ok(Json(state.scans.get(&id).map_err(scan_error)?))
}

#[derive(Debug, Serialize)]
struct ScanQueueItem {
    rank: usize,
    post_id: String,
    score: f64,
    platform: Platform,
    partition: Partition,
    text: String,
    locations: Vec<EntitySpan>,
    labels: Vec<AnnotationRecord>,
    labels_hidden: bool,
}

#[derive(Debug, Serialize)]
struct ScanQueue {
    scan_id: String,
    #[serde(flatten)]
    page: Page<ScanQueueItem>,
}

async fn scan_queue(
    State(state): State<Shared>,
    Path(id): Path<String>,
    Query(params): Query<QueueParams>,
) -> Result<Json<ScanQueue>, ApiError> {
    let report = state.scans.get(&id).map_err(scan_error)?;
    let mut labels = labels_by_post(&state);
    let items = report
        .flagged
        .into_iter()
        .enumerate()
        .filter(|(_, f)| params.platform.is_none_or(|pl| f.platform == pl))
        .filter_map(|(rank, f)| {
            let all = labels.remove(&f.post_id).unwrap_or_default();
            if !keep(&all, &params) {
                return None;
            }
            let (labels, labels_hidden) = visible_labels(all, params.annotator.as_deref());
            Some(ScanQueueItem {
                rank,
                post_id: f.post_id,
                score: f.score,
                platform: f.platform,
                partition: f.partition,
                text: f.text,
                locations: f.locations,
                labels,
                labels_hidden,
            })
        })
        .collect();
    Ok(Json(ScanQueue {
        scan_id: report.scan_id,
        page: paginate(items, &params),
    }))
}

#[derive(Debug, Serialize)]
struct AuditItem {
    post_id: String,
    predicted: u8,
    score: f64,
    labels: Vec<AnnotationRecord>,
}

#[derive(Debug, Serialize)]
struct AuditView {
    scan_id: String,
    seed: Option<u64>,
    items: Vec<AuditItem>,
    estimated_metrics: Option<EstimatedMetrics>,
}

async fn scan_audit(
    State(state): State<Shared>,
    Path(id): Path<String>,
) -> Result<Json<AuditView>, ApiError> {
    let report = state.scans.get(&id).map_err(scan_error)?;
    let mut labels = labels_by_post(&state);
    let items = report
        .audit_pos_sample
        .iter()
        .chain(&report.audit_neg_sample)
        .filter_map(|pid| report.prediction(pid))
        .map(|p| AuditItem {
            post_id: p.post_id.clone(),
            predicted: p.label,
            score: p.score,
            labels: labels.remove(&p.post_id).unwrap_or_default(),
        })
        .collect();
    Ok(Json(AuditView {
        scan_id: report.scan_id.clone(),
        seed: report.audit_seed,
        items,
        estimated_metrics: report.estimated_metrics.clone(),
    }))
}
