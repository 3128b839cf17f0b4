use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::metrics::{compute_macro_metrics, ConfusionMatrix, MacroMetrics, MetricsError};
use crate::annotation::LabeledExample;
use crate::backends::GenerativeBackend;
use crate::cascade::{parse_llm_response, GenerationParams};

/// Zero-shot rating prompt. The first `<schema>` receives the input
/// schema, the second the output schema; the post follows as `Input:`.
pub const ZERO_SHOT_PROMPT: &str = "Please determine if the content is an anticipatory infrastructure concern, specifically warning about infrastructure issues in a specific location or state. Rate it as 0 (not an infrastructure concern) or 1 (an infrastructure concern).
The concern strictly must be in a future tense and negative. The concern must be genuine and not a joke, rant, or sarcasm.
Environmental concerns are not considered infrastructure concerns.
Input Schema: <schema>
Output Schema: <schema>
Please output the extracted information in cleaned JSON format.
Please adhere to the current output schema. Do not output anything else.";

pub fn input_schema() -> Value {
    json!({"id": "string", "text": "string"})
}

pub fn output_schema() -> Value {
    json!({"id": "string", "rating": "integer, 0 or 1"})
}

pub fn render_zero_shot_prompt(template: &str, id: &str, text: &str) -> String {
    let filled = template
        .replacen("<schema>", &input_schema().to_string(), 1)
        .replacen("<schema>", &output_schema().to_string(), 1);
    format!("{filled}\nInput: {}", json!({"id": id, "text": text}))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ZeroShotOutcome {
    Label { label: u8 },
    Abstain { reason: String },
}

fn read_rating(v: &Value) -> Option<u8> {
    match v.get("rating")? {
        Value::Number(n) => match n.as_f64()? {
            0.0 => Some(0),
            1.0 => Some(1),
            _ => None,
        },
        Value::String(s) => match s.trim() {
            "0" => Some(0),
            "1" => Some(1),
            _ => None,
        },
        Value::Bool(b) => Some(u8::from(*b)),
        _ => None,
    }
}

/// Asks the model for a 0/1 rating, retrying once with the same prompt.
/// A response still unreadable after the retry is an abstention, never a
/// guessed label.
pub fn zero_shot_classify(
    post_id: &str,
    text: &str,
    template: &str,
    backend: &dyn GenerativeBackend,
    params: &GenerationParams,
) -> ZeroShotOutcome {
    let prompt = render_zero_shot_prompt(template, post_id, text);
    let ids = [post_id.to_string()];
    let mut reason = String::new();
    for attempt in 0..2 {
        let raw = match backend.generate_attempt(&prompt, params, attempt) {
            Ok(raw) => raw,
            Err(e) => {
                reason = e.message;
                continue;
            }
        };
        match parse_llm_response(&raw, &ids) {
            Ok(parsed) => match read_rating(&parsed.items[post_id]) {
                Some(label) => return ZeroShotOutcome::Label { label },
                None => reason = "response has no 0/1 rating".into(),
            },
            Err(e) => reason = e.to_string(),
        }
    }
    ZeroShotOutcome::Abstain { reason }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Abstention {
    pub post_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroShotReport {
    pub model: String,
    pub n_items: usize,
    pub n_scored: usize,
    /// Excluded from the metrics.
    pub abstentions: Vec<Abstention>,
    pub metrics: Option<MacroMetrics>,
    pub confusion: Option<ConfusionMatrix>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Zero-shot labels for `examples` (unmasked text), scored on the items
/// the model answered.
pub fn zero_shot_evaluate(
    examples: &[&LabeledExample],
    template: &str,
    backend: &dyn GenerativeBackend,
    params: &GenerationParams,
) -> Result<ZeroShotReport, MetricsError> {
    let mut preds = Vec::new();
    let mut golds = Vec::new();
    let mut abstentions = Vec::new();
    for e in examples {
        match zero_shot_classify(&e.post_id, &e.text, template, backend, params) {
            ZeroShotOutcome::Label { label } => {
                preds.push(label);
                golds.push(e.label);
            }
            ZeroShotOutcome::Abstain { reason } => abstentions.push(Abstention {
                post_id: e.post_id.clone(),
                reason,
            }),
        }
    }
    let mut warnings = Vec::new();
    if !abstentions.is_empty() {
        warnings.push(format!(
            "{} abstentions excluded from metrics",
            abstentions.len()
        ));
    }
    let scored = if preds.is_empty() {
        None
    } else {
        Some(compute_macro_metrics(&preds, &golds)?)
    };
    if let Some(s) = &scored {
        warnings.extend(s.warnings.iter().cloned());
    }
    Ok(ZeroShotReport {
        model: backend.model_identifier().to_string(),
        n_items: examples.len(),
        n_scored: preds.len(),
        abstentions,
        metrics: scored.as_ref().map(|s| s.metrics),
        confusion: scored.as_ref().map(|s| s.confusion),
        warnings,
    })
}
