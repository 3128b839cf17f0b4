//! Recovery of structured answers from free-form model output.

use std::collections::BTreeMap;

use serde_json::Value;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ResponseError {
    #[error("no balanced JSON value found in response")]
    NoJson,
    #[error("response lacks ids {missing:?}")]
    MissingIds {
        missing: Vec<String>,
        /// Items that were present.
        partial: BTreeMap<String, Value>,
    },
}

/// Per-id items recovered from a response.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedResponse {
    pub items: BTreeMap<String, Value>,
    /// Ids present in the response but not requested; ignored.
    pub unexpected: Vec<String>,
}

/// End index (exclusive) of the balanced bracket value starting at `start`,
/// or `None` when brackets mismatch or never close.
fn balanced_end(bytes: &[u8], start: usize) -> Option<usize> {
    let mut stack: Vec<u8> = Vec::new();
    let mut in_string = false;
    let mut escaped = false;
    for (i, &b) in bytes.iter().enumerate().skip(start) {
        if in_string {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == b'"' {
                in_string = false;
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'{' => stack.push(b'}'),
            b'[' => stack.push(b']'),
            b'}' | b']' => {
                if stack.pop() != Some(b) {
                    return None;
                }
                if stack.is_empty() {
                    return Some(i + 1);
                }
            }
            _ => {}
        }
    }
    None
}

/// First balanced `{...}` or `[...]` region of `raw` that parses as JSON.
///
/// Bracket depth is tracked outside string literals only, so braces inside
/// strings (including escaped quotes) do not end the value early. Regions
/// that balance but fail to parse, such as bracketed prose, are skipped.
pub fn extract_first_json(raw: &str) -> Option<Value> {
    let bytes = raw.as_bytes();
    let mut from = 0;
    while let Some(offset) = bytes[from..].iter().position(|b| *b == b'{' || *b == b'[') {
        let start = from + offset;
        if let Some(end) = balanced_end(bytes, start) {
            if let Ok(v) = serde_json::from_str(&raw[start..end]) {
                return Some(v);
            }
        }
        from = start + 1;
    }
    None
}

fn id_of(v: &Value) -> Option<String> {
    match v.get("id")? {
        Value::String(s) => Some(s.trim().to_string()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

/// Objects carrying per-item answers: a top-level array, a single object,
/// or the first array of objects nested one level inside an object.
fn candidate_items(value: &Value) -> Vec<&Value> {
    match value {
        Value::Array(items) => items.iter().filter(|v| v.is_object()).collect(),
        Value::Object(map) => {
            if value.get("id").is_some() {
                return vec![value];
            }
            let nested = map.values().find_map(|v| match v {
                Value::Array(items) if items.iter().any(|i| i.get("id").is_some()) => {
                    Some(items.iter().filter(|v| v.is_object()).collect())
                }
                _ => None,
            });
            nested.unwrap_or_else(|| vec![value])
        }
        _ => Vec::new(),
    }
}

/// Extracts the first balanced JSON value from `raw` and indexes its items
/// by id, checking that every expected id is answered.
///
/// When exactly one id is expected, a lone object without an `id` field is
/// taken as the answer for it.
pub fn parse_llm_response(
    raw: &str,
    expected_ids: &[String],
) -> Result<ParsedResponse, ResponseError> {
    let value = extract_first_json(raw).ok_or(ResponseError::NoJson)?;
    let mut parsed = ParsedResponse::default();
    let items = candidate_items(&value);
    for item in &items {
        let id = match id_of(item) {
            Some(id) => id,
            None if expected_ids.len() == 1 && items.len() == 1 => expected_ids[0].clone(),
            None => continue,
        };
        if expected_ids.contains(&id) {
            parsed.items.entry(id).or_insert_with(|| (*item).clone());
        } else {
            log::warn!("ignoring unexpected id {id:?} in model response");
            parsed.unexpected.push(id);
        }
    }
    let missing: Vec<String> = expected_ids
        .iter()
        .filter(|id| !parsed.items.contains_key(*id))
        .cloned()
        .collect();
    if !missing.is_empty() {
        return Err(ResponseError::MissingIds {
            missing,
            partial: parsed.items,
        });
    }
    Ok(parsed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn ids(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn exact_array() {
        let raw = r#"[{"id":"1","concern":true,"locations":["Lowell"],"leaning":"bipartisan"}]"#;
        let p = parse_llm_response(raw, &ids(&["1"])).unwrap();
        assert_eq!(p.items["1"]["locations"], json!(["Lowell"]));
    }

    #[test]
    fn trailing_prose_discarded() {
        let raw = "[{\"id\": 1, \"concern\": false}] I hope this helps! {not json}";
        let p = parse_llm_response(raw, &ids(&["1"])).unwrap();
        assert_eq!(p.items["1"]["concern"], false);
    }

    #[test]
    fn brace_inside_string() {
        assert_eq!(extract_first_json(r#"{"a": "}"}"#), Some(json!({"a": "}"})));
        assert_eq!(
            extract_first_json(r#"x {"a": "say \"}\" ok"} y"#),
            Some(json!({"a": "say \"}\" ok"}))
        );
    }

    #[test]
    fn bracketed_prose_before_json_skipped() {
        let raw = "Here [as requested] is it: {\"rating\": 1}";
        assert_eq!(extract_first_json(raw), Some(json!({"rating": 1})));
    }

    #[test]
    fn single_expected_id_accepts_bare_object() {
        let p = parse_llm_response(r#"{"rating": 1}"#, &ids(&["p7"])).unwrap();
        assert_eq!(p.items["p7"]["rating"], 1);
    }

    #[test]
    fn nested_result_array() {
        let raw = r#"{"results": [{"id": "a", "concern": true}, {"id": "b", "concern": false}]}"#;
        let p = parse_llm_response(raw, &ids(&["a", "b"])).unwrap();
        assert_eq!(p.items.len(), 2);
    }

    #[test]
    fn missing_and_unexpected_ids() {
        let raw = r#"[{"id": "a"}, {"id": "zzz"}]"#;
        match parse_llm_response(raw, &ids(&["a", "b"])) {
            Err(ResponseError::MissingIds { missing, partial }) => {
                assert_eq!(missing, ids(&["b"]));
                assert!(partial.contains_key("a"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let p = parse_llm_response(raw, &ids(&["a"])).unwrap();
        assert_eq!(p.unexpected, ids(&["zzz"]));
    }

    #[test]
    fn no_json_at_all() {
        assert_eq!(
            parse_llm_response("I cannot help with that", &ids(&["1"])),
            Err(ResponseError::NoJson)
        );
        assert_eq!(
            parse_llm_response("[1, 2", &ids(&["1"])),
            Err(ResponseError::NoJson)
        );
    }
}
