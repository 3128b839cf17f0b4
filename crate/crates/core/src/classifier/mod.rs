//! Splits, training and evaluation of binary concern classifiers, plus
//! zero-shot rating by a generative model.

mod bow;
mod config;
mod harness;
mod metrics;
mod model;
mod rule;
mod split;
mod zeroshot;

pub use bow::{tokenize, BowLogReg, BOW_MODEL_ID};
pub use config::{MaskingVariant, OptimizerConfig, TrainConfig};
pub use harness::{evaluate, evaluate_classifiers, train, EvalReport, HarnessError, RunEval};
pub use metrics::{
    aggregate, compute_macro_metrics, confusion_matrix, metrics_from_confusion, ClassMetrics,
    ConfusionMatrix, Dispersion, DispersionKind, MacroMetrics, MetricsError, MetricsOutcome,
};
pub use model::{
    model_input, Classifier, ClassifierError, ModelArtifact, Prediction, RunArtifact, TrainBackend,
    TrainError, TrainExample,
};
pub use rule::{RuleConcern, RuleConcernBackend, RULE_MODEL_ID};
pub use split::{
    dataset_hash, make_kfold, make_splits, Protocol, SplitError, SplitManifest, DEFAULT_RUNS,
    DEFAULT_TRAIN_RATIO,
};
pub use zeroshot::{
    render_zero_shot_prompt, zero_shot_classify, zero_shot_evaluate, Abstention, ZeroShotOutcome,
    ZeroShotReport, ZERO_SHOT_PROMPT,
};

/// Built-in training backend for a model identifier.
pub fn train_backend(model_identifier: &str) -> Option<Box<dyn TrainBackend>> {
    match model_identifier {
        BOW_MODEL_ID => Some(Box::new(BowLogReg)),
        RULE_MODEL_ID => Some(Box::new(RuleConcernBackend)),
        _ => None,
    }
}
