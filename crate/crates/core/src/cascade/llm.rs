use std::collections::BTreeMap;

use serde_json::{json, Value};

use super::config::{CascadeConfig, FewShotExample, Leaning};
use super::decision::{DecisionPayload, Stage, StageDecision, Verdict};
use super::response::{parse_llm_response, ResponseError};
use crate::backends::GenerativeBackend;
use crate::corpus::Post;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("batch of {got} exceeds configured batch size {max}")]
pub struct BatchTooLarge {
    pub got: usize,
    pub max: usize,
}

fn example_block(examples: &[FewShotExample]) -> String {
    let comments: Vec<Value> = examples
        .iter()
        .enumerate()
        .map(|(i, e)| json!({"id": format!("e{}", i + 1), "text": e.text}))
        .collect();
    let response: Vec<Value> = examples
        .iter()
        .enumerate()
        .map(|(i, e)| {
            json!({
                "id": format!("e{}", i + 1),
                "concern": e.concern,
                "locations": e.locations,
                "leaning": e.leaning,
            })
        })
        .collect();
    json!({"comments": comments, "response": response}).to_string()
}

/// Renders the annotation prompt for a batch. Items are numbered `1..=n`
/// within the batch so the model never sees platform ids.
pub fn render_annotation_prompt(config: &CascadeConfig, texts: &[&str]) -> String {
    let comments: Vec<Value> = texts
        .iter()
        .enumerate()
        .map(|(i, t)| json!({"id": (i + 1).to_string(), "text": t}))
        .collect();
    config
        .annotation_prompt
        .replace("<examples>", &example_block(&config.llm_examples))
        .replace("<comments>", &Value::Array(comments).to_string())
        .replace("<response>", "")
}

fn as_concern(v: &Value) -> Option<bool> {
    match v {
        Value::Bool(b) => Some(*b),
        Value::Number(n) => match n.as_i64() {
            Some(0) => Some(false),
            Some(1) => Some(true),
            _ => None,
        },
        Value::String(s) => match s.trim().to_lowercase().as_str() {
            "true" | "yes" => Some(true),
            "false" | "no" => Some(false),
            _ => None,
        },
        _ => None,
    }
}

fn as_locations(v: Option<&Value>) -> Vec<String> {
    match v {
        Some(Value::Array(items)) => items
            .iter()
            .filter_map(Value::as_str)
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect(),
        Some(Value::String(s)) if !s.trim().is_empty() => vec![s.trim().to_string()],
        _ => Vec::new(),
    }
}

fn as_leaning(v: Option<&Value>) -> Option<Leaning> {
    let s = v?.as_str()?.trim().to_lowercase();
    serde_json::from_value(Value::String(s)).ok()
}

/// Payload for one answered item, or `None` when the concern flag is
/// absent or unreadable.
pub fn item_payload(item: &Value) -> Option<DecisionPayload> {
    let concern = as_concern(item.get("concern")?)?;
    Some(DecisionPayload {
        concern: Some(concern),
        locations: as_locations(item.get("locations")),
        leaning: as_leaning(item.get("leaning")),
        ..Default::default()
    })
}

enum Attempt {
    Complete(BTreeMap<String, DecisionPayload>),
    Partial(BTreeMap<String, DecisionPayload>, String),
    Failed { message: String, retriable: bool },
}

fn attempt(
    prompt: &str,
    ids: &[String],
    config: &CascadeConfig,
    backend: &dyn GenerativeBackend,
    n: u32,
) -> Attempt {
    let raw = match backend.generate_attempt(prompt, &config.generation, n) {
        Ok(raw) => raw,
        Err(e) => {
            return Attempt::Failed {
                message: e.message,
                retriable: e.retriable,
            }
        }
    };
    let (items, mut problem) = match parse_llm_response(&raw, ids) {
        Ok(p) => (p.items, None),
        Err(ResponseError::MissingIds { partial, missing }) => {
            (partial, Some(format!("response lacks ids {missing:?}")))
        }
        Err(e @ ResponseError::NoJson) => {
            return Attempt::Failed {
                message: e.to_string(),
                retriable: true,
            }
        }
    };
    let mut decided = BTreeMap::new();
    for (id, item) in items {
        match item_payload(&item) {
            Some(p) => {
                decided.insert(id, p);
            }
            None => {
                problem.get_or_insert_with(|| format!("item {id} has no readable concern flag"));
            }
        }
    }
    match problem {
        None => Attempt::Complete(decided),
        Some(p) => Attempt::Partial(decided, p),
    }
}

/// Annotates one batch. A response that cannot be fully read is retried
/// once with the identical prompt; items still unanswered after the retry
/// get error verdicts. Decisions follow batch order.
pub fn llm_annotate(
    batch: &[Post],
    config: &CascadeConfig,
    backend: &dyn GenerativeBackend,
) -> Result<Vec<StageDecision>, BatchTooLarge> {
    let hash = config.llm_hash(backend.model_identifier());
    llm_annotate_hashed(batch, config, backend, &hash)
}

pub(crate) fn llm_annotate_hashed(
    batch: &[Post],
    config: &CascadeConfig,
    backend: &dyn GenerativeBackend,
    hash: &str,
) -> Result<Vec<StageDecision>, BatchTooLarge> {
    if batch.len() > config.batch_size {
        return Err(BatchTooLarge {
            got: batch.len(),
            max: config.batch_size,
        });
    }
    if batch.is_empty() {
        return Ok(Vec::new());
    }
    let texts: Vec<&str> = batch.iter().map(|p| p.text.as_str()).collect();
    let ids: Vec<String> = (1..=batch.len()).map(|i| i.to_string()).collect();
    let prompt = render_annotation_prompt(config, &texts);

    let mut decided = BTreeMap::new();
    let mut failure = (String::new(), false);
    for n in 0..2 {
        match attempt(&prompt, &ids, config, backend, n) {
            Attempt::Complete(items) => {
                decided = items;
                failure = (String::new(), false);
                break;
            }
            Attempt::Partial(items, message) => {
                log::warn!("llm attempt {n}: {message}");
                // Later answers win; earlier partial answers fill gaps.
                decided.extend(items);
                failure = (message, true);
            }
            Attempt::Failed { message, retriable } => {
                log::warn!("llm attempt {n}: {message}");
                failure = (message, retriable);
            }
        }
    }

    Ok(batch
        .iter()
        .zip(&ids)
        .map(|(post, id)| match decided.remove(id) {
            Some(payload) => StageDecision {
                post_id: post.post_id.clone(),
                stage: Stage::Llm,
                verdict: if payload.concern == Some(true) {
                    Verdict::Retain
                } else {
                    Verdict::Drop
                },
                score: None,
                payload: Some(payload),
                stage_config_hash: hash.to_string(),
                error: None,
            },
            None => StageDecision::failed(
                &post.post_id,
                Stage::Llm,
                hash,
                if failure.0.is_empty() {
                    "item missing from model response".to_string()
                } else {
                    failure.0.clone()
                },
                failure.1,
            ),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use std::sync::Mutex;

    use super::*;
    use crate::backends::{BackendError, RuleAnnotator};
    use crate::cascade::GenerationParams;
    use crate::corpus::{test_support::post, Platform};

    struct Scripted {
        replies: Mutex<Vec<Result<String, BackendError>>>,
        prompts: Mutex<Vec<(String, u32)>>,
    }

    impl Scripted {
        fn new(replies: Vec<Result<String, BackendError>>) -> Self {
            Self {
                replies: Mutex::new(replies),
                prompts: Mutex::new(Vec::new()),
            }
        }
    }

    impl GenerativeBackend for Scripted {
        fn model_identifier(&self) -> &str {
            "scripted"
        }
        fn generate(&self, p: &str, g: &GenerationParams) -> Result<String, BackendError> {
            self.generate_attempt(p, g, 0)
        }
        fn generate_attempt(
            &self,
            p: &str,
            _g: &GenerationParams,
            n: u32,
        ) -> Result<String, BackendError> {
            self.prompts.lock().unwrap().push((p.to_string(), n));
            self.replies.lock().unwrap().remove(0)
        }
    }

    fn batch(texts: &[&str]) -> Vec<Post> {
        texts
            .iter()
            .enumerate()
            .map(|(i, t)| post(&format!("r:{i}"), Platform::Reddit, t, 0))
            .collect()
    }

    #[test]
    fn prompt_layout() {
        let c = CascadeConfig::default();
        let p = render_annotation_prompt(&c, &["first", "second \"quoted\""]);
        assert!(p.starts_with("You are a human annotator"));
        assert!(p.contains(
            r#"Comments: [{"id":"1","text":"first"},{"id":"2","text":"second \"quoted\""}]"#
        ));
        assert!(p.ends_with("Response: "));
        assert!(p.contains(r#""id":"e4""#));
    }

    #[test]
    fn clean_response_retains_with_payload() {
        let b = Scripted::new(vec![Ok(
            r#"[{"id":"1","concern":true,"locations":["Lowell"],"leaning":"bipartisan"}]"#.into(),
        )]);
        let d = llm_annotate(&batch(&["x"]), &CascadeConfig::default(), &b).unwrap();
        assert_eq!(d[0].verdict, Verdict::Retain);
        let payload = d[0].payload.clone().unwrap();
        assert_eq!(payload.locations, vec!["Lowell"]);
        assert_eq!(payload.leaning, Some(Leaning::Bipartisan));
    }

    #[test]
    fn chatty_prefix_recovered() {
        let b = Scripted::new(vec![Ok(
            "Sure, here is the JSON:\n[{\"id\":\"1\",\"concern\":false}]".into(),
        )]);
        let d = llm_annotate(&batch(&["x"]), &CascadeConfig::default(), &b).unwrap();
        assert_eq!(d[0].verdict, Verdict::Drop);
        assert_eq!(b.prompts.lock().unwrap().len(), 1);
    }

    #[test]
    fn refusal_twice_errors_every_item() {
        let b = Scripted::new(vec![
            Ok("I cannot help with that".into()),
            Ok("I cannot help with that".into()),
        ]);
        let d = llm_annotate(&batch(&["x", "y", "z"]), &CascadeConfig::default(), &b).unwrap();
        assert_eq!(d.len(), 3);
        assert!(d.iter().all(|d| d.verdict == Verdict::Error));
        let prompts = b.prompts.lock().unwrap();
        assert_eq!(prompts[0].0, prompts[1].0);
        assert_eq!((prompts[0].1, prompts[1].1), (0, 1));
    }

    #[test]
    fn retry_recovers() {
        let b = Scripted::new(vec![
            Err(BackendError::retriable("timeout")),
            Ok(r#"[{"id":"2","concern":true},{"id":"1","concern":false}]"#.into()),
        ]);
        let d = llm_annotate(&batch(&["x", "y"]), &CascadeConfig::default(), &b).unwrap();
        assert_eq!(d[0].post_id, "r:0");
        assert_eq!(d[0].verdict, Verdict::Drop);
        assert_eq!(d[1].verdict, Verdict::Retain);
    }

    #[test]
    fn partial_answers_keep_decided_items() {
        let b = Scripted::new(vec![
            Ok(r#"[{"id":"1","concern":true}]"#.into()),
            Ok(r#"[{"id":"1","concern":true}]"#.into()),
        ]);
        let d = llm_annotate(&batch(&["x", "y"]), &CascadeConfig::default(), &b).unwrap();
        assert_eq!(d[0].verdict, Verdict::Retain);
        assert_eq!(d[1].verdict, Verdict::Error);
        assert!(d[1].error.as_ref().unwrap().message.contains("\"2\""));
    }

    #[test]
    fn oversize_batch_rejected() {
        let c = CascadeConfig {
            batch_size: 1,
            ..Default::default()
        };
        let b = Scripted::new(vec![]);
        assert!(llm_annotate(&batch(&["x", "y"]), &c, &b).is_err());
    }

    #[test]
    fn rule_annotator_round_trip() {
        let b = RuleAnnotator::default();
        let d = llm_annotate(
            &batch(&["Bay bridge in Maryland is next.", "nice day"]),
            &CascadeConfig::default(),
            &b,
        )
        .unwrap();
        assert_eq!(d[0].verdict, Verdict::Retain);
        assert_eq!(d[0].payload.as_ref().unwrap().locations, vec!["Maryland"]);
        assert_eq!(d[1].verdict, Verdict::Drop);
    }

    #[test]
    fn lenient_field_types() {
        let p =
            item_payload(&json!({"concern": "True", "locations": "Ohio", "leaning": "Liberal"}))
                .unwrap();
        assert_eq!(p.concern, Some(true));
        assert_eq!(p.locations, vec!["Ohio"]);
        assert_eq!(p.leaning, Some(Leaning::Liberal));
        assert!(item_payload(&json!({"locations": []})).is_none());
    }
}
