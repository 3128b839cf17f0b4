//! The keyword → NLI → LLM pruning cascade.

mod config;
mod decision;
mod funnel;
mod keyword;
mod llm;
mod nli;
mod response;

pub use config::{
    default_examples, CascadeConfig, FewShotExample, GenerationParams, Leaning, ANNOTATION_PROMPT,
    DEFAULT_BATCH_SIZE, DEFAULT_HYPOTHESIS, DEFAULT_KEYWORDS, DEFAULT_NLI_THRESHOLD,
};
pub use decision::{DecisionPayload, Stage, StageDecision, StageFailure, Verdict};
pub use funnel::{
    read_decisions, run_cascade, CascadeBackends, CascadeError, CascadeOutcome, FunnelReport,
    StageCounts, StageReport, DECISIONS_FILE, FUNNEL_FILE, RETAINED_FILE,
};
pub use keyword::{keyword_filter, matching_keywords};
pub use llm::{item_payload, llm_annotate, render_annotation_prompt, BatchTooLarge};
pub use nli::{nli_stage, premise_limit};
pub use response::{extract_first_json, parse_llm_response, ParsedResponse, ResponseError};
