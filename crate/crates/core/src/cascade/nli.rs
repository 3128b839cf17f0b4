use super::config::CascadeConfig;
use super::decision::{DecisionPayload, Stage, StageDecision, Verdict};
use crate::backends::NliBackend;
use crate::corpus::Post;

/// Premise length cap: the tighter of the configured and backend limits.
pub fn premise_limit(config: &CascadeConfig, backend: &dyn NliBackend) -> Option<usize> {
    match (config.nli_max_premise_chars, backend.max_premise_chars()) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    }
}

pub fn nli_stage(post: &Post, config: &CascadeConfig, backend: &dyn NliBackend) -> StageDecision {
    let hash = config.nli_hash(backend.model_identifier());
    nli_stage_hashed(post, config, backend, &hash)
}

pub(crate) fn nli_stage_hashed(
    post: &Post,
    config: &CascadeConfig,
    backend: &dyn NliBackend,
    hash: &str,
) -> StageDecision {
    if post.text.trim().is_empty() {
        return StageDecision::failed(&post.post_id, Stage::Nli, hash, "empty premise", false);
    }
    let mut premise = post.text.as_str();
    let mut truncated_to = None;
    if let Some(limit) = premise_limit(config, backend) {
        if let Some((byte, _)) = premise.char_indices().nth(limit) {
            premise = &premise[..byte];
            truncated_to = Some(limit);
        }
    }
    let scores = match backend
        .infer(premise, &config.nli_hypothesis)
        .and_then(|s| s.validate().map(|_| s))
    {
        Ok(s) => s,
        Err(e) => {
            return StageDecision::failed(&post.post_id, Stage::Nli, hash, e.message, e.retriable)
        }
    };
    let verdict = if scores.entailment > config.nli_threshold {
        Verdict::Retain
    } else {
        Verdict::Drop
    };
    StageDecision {
        post_id: post.post_id.clone(),
        stage: Stage::Nli,
        verdict,
        score: Some(scores.entailment),
        payload: truncated_to.map(|n| DecisionPayload {
            truncated_to: Some(n),
            ..Default::default()
        }),
        stage_config_hash: hash.to_string(),
        error: None,
    }
}
