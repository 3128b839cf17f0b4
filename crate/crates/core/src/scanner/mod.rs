//! Applying a trained classifier to unseen posts, audit sampling, and
//! audit-based performance estimates.

mod report;
mod scan;
mod store;

pub use report::{
    EstimatedMetrics, FlaggedPost, ModelRef, ScanErrorItem, ScanPrediction, ScanReport, ScanSummary,
};
pub use scan::{
    audit_labels_from_records, corpus_hash, estimate_wild_metrics, queue_order, sample_audit, scan,
    ScanError, ScanModel, ScanOptions, ESTIMATE_KIND,
};
pub use store::{write_queue_csv, ScanStore, ScanStoreError};
