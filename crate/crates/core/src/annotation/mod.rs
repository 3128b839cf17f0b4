//! Human labeling: task assignment, agreement statistics, the crowd
//! handoff filter, expert adjudication and dataset export.

mod adjudicate;
mod agreement;
mod assign;
mod export;
mod filter;
mod records;
mod store;

pub use adjudicate::{
    adjudicate, adjudicate_all, Adjudication, AdjudicationBatch, AdjudicationError, PendingDispute,
};
pub use agreement::{
    agreement_report, cohen_kappa, cohen_kappa_pairs, krippendorff_alpha,
    krippendorff_alpha_nominal, pair_key, Agreement, AgreementReport, RaterGroup,
};
pub use assign::{assign_tasks, loads, Annotator, AssignError, Assignment, AssignmentPolicy};
pub use export::{
    export_labeled, read_dataset, write_dataset, DatasetSummary, ExportError, LabeledExample,
};
pub use filter::{
    crowd_screen_negatives, handoff_filter, unanimity_filter, FilterOutcome, FilterWarning,
    HandoffPolicy,
};
pub use records::{AdjudicatedLabel, AdjudicationMethod, Affiliation, AnnotationRecord, Label};
pub use store::{read_records, AnnotationStore, StoreError};
