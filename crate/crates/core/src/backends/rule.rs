//! Deterministic rule-based backends.
//!
//! These stand in for served models in tests and fixture runs. Their rules
//! are simple enough to recompute by hand:
//!
//! * [`RuleNli`]: entailment = 0.25 x (number of distinct [`NLI_CUES`]
//!   found in the lowercased premise), capped at 1.
//! * [`RuleAnnotator`]: a comment is a concern when it names a location
//!   known to the gazetteer (or already contains the mask token) and
//!   contains one of the [`FUTURE_CUES`].

use serde_json::{json, Value};

use super::{BackendError, GenerativeBackend, NliBackend, NliScores};
use crate::cascade::GenerationParams;
use crate::hashing::fnv1a64;
use crate::masking::{extract_locations, GazetteerNer, DEFAULT_MASK_TOKEN};

pub const NLI_CUES: [&str; 12] = [
    "bridge",
    "collapse",
    "crack",
    "rust",
    "crumbling",
    "unsafe",
    "dangerous",
    "falling apart",
    "pothole",
    "worried",
    "scary",
    "repair",
];

pub const FUTURE_CUES: [&str; 8] = [
    "is next",
    "will collapse",
    "will fail",
    "gonna",
    "going to",
    "won't be long",
    "any day now",
    "waiting to happen",
];

/// A comment containing this marker makes [`RuleAnnotator`] refuse the
/// whole batch.
pub const REFUSAL_MARKER: &str = "[refuse]";

/// Rule NLI; see the module docs.
#[derive(Debug, Clone, Default)]
pub struct RuleNli {
    pub max_premise_chars: Option<usize>,
}

impl RuleNli {
    pub const MODEL: &'static str = "rule-nli/1";

    pub fn entailment(premise: &str) -> f64 {
        let lower = premise.to_lowercase();
        let hits = NLI_CUES.iter().filter(|c| lower.contains(*c)).count();
        (0.25 * hits as f64).min(1.0)
    }
}

impl NliBackend for RuleNli {
    fn model_identifier(&self) -> &str {
        Self::MODEL
    }

    fn max_premise_chars(&self) -> Option<usize> {
        self.max_premise_chars
    }

    fn infer(&self, premise: &str, _hypothesis: &str) -> Result<NliScores, BackendError> {
        let entailment = Self::entailment(premise);
        let contradiction = (1.0 - entailment) / 2.0;
        Ok(NliScores {
            entailment,
            contradiction,
            neutral: 1.0 - entailment - contradiction,
        })
    }
}

/// How [`RuleAnnotator`] wraps its JSON.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ResponseStyle {
    /// Bare JSON.
    Plain,
    /// Picks bare JSON, a prose preamble, or a fenced block with trailing
    /// prose, keyed on a hash of the prompt.
    #[default]
    Chatty,
}

/// Rule annotator and zero-shot rater; see the module docs.
#[derive(Debug, Clone, Default)]
pub struct RuleAnnotator {
    pub style: ResponseStyle,
    ner: GazetteerNer,
}

impl RuleAnnotator {
    pub const MODEL: &'static str = "rule-annotator/1";

    pub fn new(style: ResponseStyle) -> Self {
        Self {
            style,
            ner: GazetteerNer::default(),
        }
    }

    /// `(is concern, location surfaces)` for one comment.
    pub fn judge(&self, text: &str) -> (bool, Vec<String>) {
        let locations: Vec<String> = extract_locations(text, &self.ner)
            .expect("gazetteer spans are valid")
            .into_iter()
            .map(|s| s.surface)
            .collect();
        let located = !locations.is_empty() || text.contains(DEFAULT_MASK_TOKEN);
        let lower = text.to_lowercase();
        let future = FUTURE_CUES.iter().any(|c| lower.contains(c));
        (located && future, locations)
    }

    fn leaning(text: &str) -> &'static str {
        let lower = text.to_lowercase();
        if lower.contains("republican") || lower.contains("conservative") {
            "conservative"
        } else if lower.contains("democrat") || lower.contains("liberal") {
            "liberal"
        } else {
            "bipartisan"
        }
    }

    fn wrap(&self, prompt: &str, body: String) -> String {
        if self.style == ResponseStyle::Plain {
            return body;
        }
        match fnv1a64(prompt.as_bytes()) % 3 {
            0 => body,
            1 => format!("Sure, here is the JSON:\n{body}"),
            _ => format!("```json\n{body}\n```\nLet me know if you need anything else."),
        }
    }

    fn annotate(&self, prompt: &str) -> Result<String, BackendError> {
        let start = prompt
            .rfind("\nComments: ")
            .ok_or_else(|| BackendError::fatal("prompt has no Comments section"))?
            + "\nComments: ".len();
        let end = prompt[start..]
            .find("\nResponse:")
            .map_or(prompt.len(), |i| start + i);
        let comments: Vec<Value> = serde_json::from_str(&prompt[start..end])
            .map_err(|e| BackendError::fatal(format!("unreadable comments block: {e}")))?;
        let mut out = Vec::with_capacity(comments.len());
        for c in &comments {
            let text = c["text"].as_str().unwrap_or_default();
            if text.contains(REFUSAL_MARKER) {
                return Ok("I cannot help with that.".to_string());
            }
            let (concern, locations) = self.judge(text);
            out.push(json!({
                "id": c["id"],
                "concern": concern,
                "locations": locations,
                "leaning": Self::leaning(text),
            }));
        }
        Ok(self.wrap(prompt, Value::Array(out).to_string()))
    }

    fn rate(&self, prompt: &str) -> Result<String, BackendError> {
        let start = prompt
            .rfind("\nInput: ")
            .ok_or_else(|| BackendError::fatal("prompt has no Input section"))?
            + "\nInput: ".len();
        let input: Value = serde_json::from_str(prompt[start..].trim())
            .map_err(|e| BackendError::fatal(format!("unreadable input block: {e}")))?;
        let text = input["text"].as_str().unwrap_or_default();
        if text.contains(REFUSAL_MARKER) {
            return Ok("I'm sorry, I can't rate this content.".to_string());
        }
        let rating = u8::from(self.judge(text).0);
        Ok(self.wrap(
            prompt,
            json!({"id": input["id"], "rating": rating}).to_string(),
        ))
    }
}

impl GenerativeBackend for RuleAnnotator {
    fn model_identifier(&self) -> &str {
        Self::MODEL
    }

    fn generate(&self, prompt: &str, _params: &GenerationParams) -> Result<String, BackendError> {
        if prompt.contains("Output Schema") {
            self.rate(prompt)
        } else {
            self.annotate(prompt)
        }
    }
}
