use std::fmt;

use serde::{Deserialize, Serialize};

use super::config::Leaning;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Keyword,
    Nli,
    Llm,
}

impl Stage {
    pub const ORDER: [Stage; 3] = [Stage::Keyword, Stage::Nli, Stage::Llm];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Keyword => "keyword",
            Stage::Nli => "nli",
            Stage::Llm => "llm",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Retain,
    Drop,
    Error,
}

/// Structured extract attached to a decision.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DecisionPayload {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub matched_keywords: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub concern: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub locations: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leaning: Option<Leaning>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    /// Premise length in characters after truncation, when truncated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncated_to: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageFailure {
    pub message: String,
    pub retriable: bool,
}

/// Verdict of one cascade stage on one post.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageDecision {
    pub post_id: String,
    pub stage: Stage,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<DecisionPayload>,
    pub stage_config_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<StageFailure>,
}

impl StageDecision {
    pub fn failed(
        post_id: impl Into<String>,
        stage: Stage,
        config_hash: &str,
        message: impl Into<String>,
        retriable: bool,
    ) -> Self {
        Self {
            post_id: post_id.into(),
            stage,
            verdict: Verdict::Error,
            score: None,
            payload: None,
            stage_config_hash: config_hash.to_string(),
            error: Some(StageFailure {
                message: message.into(),
                retriable,
            }),
        }
    }
}
