//! Reference implementations and generators shared by the integration tests
//! and the acceptance target. Oracles here are deliberately naive: they
//! enumerate pairs or walk label lists instead of reusing library helpers.
#![allow(dead_code)]

pub mod checks;

use std::collections::BTreeMap;

use chrono::{TimeZone, Utc};
use ombudsman_core::backends::{BackendError, NliBackend, NliScores};
use ombudsman_core::corpus::{Partition, Platform, Post};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const ALPHA_TOL: f64 = 1e-9;
pub const KAPPA_TOL: f64 = 1e-9;
pub const METRIC_TOL: f64 = 1e-12;

// ---- agreement ----

/// Alpha from its pairwise definition: observed disagreement averages over
/// ordered pairs inside each unit (weighted 1/(m-1)); expected disagreement
/// averages over every ordered pair of pairable values in the whole table.
/// `None` when undefined.
pub fn alpha_oracle(units: &[Vec<u32>]) -> Option<f64> {
    let pairable: Vec<&Vec<u32>> = units.iter().filter(|u| u.len() >= 2).collect();
    if pairable.len() < 2 {
        return None;
    }
    let values: Vec<u32> = pairable.iter().flat_map(|u| u.iter().copied()).collect();
    let n = values.len() as f64;
    let mut d_o = 0.0;
    for u in &pairable {
        let m = u.len() as f64;
        let mut diff = 0usize;
        for i in 0..u.len() {
            for j in 0..u.len() {
                if i != j && u[i] != u[j] {
                    diff += 1;
                }
            }
        }
        d_o += diff as f64 / (m - 1.0);
    }
    d_o /= n;
    let mut diff = 0usize;
    for i in 0..values.len() {
        for j in 0..values.len() {
            if i != j && values[i] != values[j] {
                diff += 1;
            }
        }
    }
    if diff == 0 {
        return None;
    }
    let d_e = diff as f64 / (n * (n - 1.0));
    Some(1.0 - d_o / d_e)
}

/// Kappa with chance agreement counted over all n^2 cross pairs.
pub fn kappa_oracle(pairs: &[(u32, u32)]) -> Option<f64> {
    if pairs.is_empty() {
        return None;
    }
    let n = pairs.len() as f64;
    let p_o = pairs.iter().filter(|(a, b)| a == b).count() as f64 / n;
    let mut same = 0usize;
    for (a, _) in pairs {
        for (_, b) in pairs {
            if a == b {
                same += 1;
            }
        }
    }
    let p_e = same as f64 / (n * n);
    if same == pairs.len() * pairs.len() {
        return None;
    }
    Some((p_o - p_e) / (1.0 - p_e))
}

/// A raters x units table; `None` marks a missing rating.
#[derive(Debug, Clone)]
pub struct RatingTable {
    pub rows: Vec<Vec<Option<u32>>>,
}

impl RatingTable {
    pub fn random(rng: &mut ChaCha8Rng) -> Self {
        let raters = rng.random_range(2..=5);
        let units = rng.random_range(5..=30);
        let categories = rng.random_range(2..=4u32);
        let missing = rng.random_range(0.0..0.3);
        // Some tables skew towards one category so agreement varies.
        let bias = rng.random_range(0.0..0.8);
        let rows = (0..raters)
            .map(|_| {
                (0..units)
                    .map(|_| {
                        if rng.random_bool(missing) {
                            None
                        } else if rng.random_bool(bias) {
                            Some(0)
                        } else {
                            Some(rng.random_range(0..categories))
                        }
                    })
                    .collect()
            })
            .collect();
        Self { rows }
    }

    pub fn units(&self) -> Vec<Vec<u32>> {
        let n = self.rows[0].len();
        (0..n)
            .map(|u| self.rows.iter().filter_map(|r| r[u]).collect())
            .collect()
    }

    /// Items both of the first two raters labeled.
    pub fn pairs(&self) -> Vec<(u32, u32)> {
        self.rows[0]
            .iter()
            .zip(&self.rows[1])
            .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
            .collect()
    }

    pub fn relabel(&self, map: &[u32]) -> Self {
        Self {
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|v| v.map(|c| map[c as usize])).collect())
                .collect(),
        }
    }

    pub fn permute_raters(&self, order: &[usize]) -> Self {
        Self {
            rows: order.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }
}

// ---- metrics ----

/// Per-class precision/recall/F1 computed by walking the label lists.
/// Zero denominators give 0, as the library does.
pub fn macro_oracle(preds: &[u8], golds: &[u8]) -> [f64; 4] {
    let mut p = [0.0; 2];
    let mut r = [0.0; 2];
    let mut f = [0.0; 2];
    for c in 0..=1u8 {
        let (mut hit, mut predicted, mut actual) = (0usize, 0usize, 0usize);
        for i in 0..preds.len() {
            if preds[i] == c {
                predicted += 1;
            }
            if golds[i] == c {
                actual += 1;
            }
            if preds[i] == c && golds[i] == c {
                hit += 1;
            }
        }
        let k = c as usize;
        p[k] = if predicted == 0 {
            0.0
        } else {
            hit as f64 / predicted as f64
        };
        r[k] = if actual == 0 {
            0.0
        } else {
            hit as f64 / actual as f64
        };
        f[k] = if p[k] + r[k] == 0.0 {
            0.0
        } else {
            2.0 * p[k] * r[k] / (p[k] + r[k])
        };
    }
    let correct = preds.iter().zip(golds).filter(|(a, b)| a == b).count();
    [
        (p[0] + p[1]) / 2.0,
        (r[0] + r[1]) / 2.0,
        (f[0] + f[1]) / 2.0,
        correct as f64 / preds.len() as f64,
    ]
}

pub fn random_labels(rng: &mut ChaCha8Rng) -> (Vec<u8>, Vec<u8>) {
    let n = rng.random_range(1..=200);
    let pos_rate = rng.random_range(0.0..1.0);
    let flip = rng.random_range(0.0..0.6);
    let golds: Vec<u8> = (0..n)
        .map(|_| u8::from(rng.random_bool(pos_rate)))
        .collect();
    let preds = golds
        .iter()
        .map(|g| if rng.random_bool(flip) { 1 - g } else { *g })
        .collect();
    (preds, golds)
}

// ---- posts and texts ----

pub fn post(id: &str, partition: Partition, text: &str) -> Post {
    let platform = match partition {
        Partition::RedditMain => Platform::Reddit,
        _ => Platform::Youtube,
    };
    Post {
        post_id: format!("{}:{id}", platform.as_str()),
        platform,
        container_id: "c0".into(),
        container_title: None,
        container_description: None,
        author_hash: "a0".into(),
        created_at: Utc.timestamp_opt(1_680_000_000, 0).unwrap(),
        text: text.to_string(),
        partition,
        matched_keywords: Vec::new(),
    }
}

/// NLI stand-in that reads its entailment score from an `nli=<x>` tag in
/// the premise. `nli=err` fails the call.
pub struct TaggedNli;

pub fn nli_tag(premise: &str) -> Option<&str> {
    let at = premise.find("nli=")? + 4;
    premise[at..].split_whitespace().next()
}

impl NliBackend for TaggedNli {
    fn model_identifier(&self) -> &str {
        "tagged-nli/1"
    }

    fn infer(&self, premise: &str, _hypothesis: &str) -> Result<NliScores, BackendError> {
        let tag = nli_tag(premise).ok_or_else(|| BackendError::fatal("untagged premise"))?;
        if tag == "err" {
            return Err(BackendError::retriable("scripted failure"));
        }
        let e: f64 = tag.parse().map_err(|_| BackendError::fatal("bad tag"))?;
        Ok(NliScores {
            entailment: e,
            contradiction: 1.0 - e,
            neutral: 0.0,
        })
    }
}

/// Entailment scores worth probing: the threshold itself, its float
/// neighbours, and a spread elsewhere.
pub const PROBE_SCORES: [f64; 9] = [
    0.0,
    0.25,
    0.4999999999999999,
    0.5,
    0.5000000000000001,
    0.500001,
    0.75,
    0.99,
    1.0,
];

pub const GAZETTEER_WORDS: [&str; 14] = [
    "Ohio",
    "Ohio River",
    "Lowell",
    "Massachusetts",
    "New York",
    "NY",
    "Pittsburgh",
    "Merrimack",
    "Kansas City",
    "Miami Beach",
    "Miami",
    "West Virginia",
    "Chesapeake Bay",
    "USA",
];

pub const FILLER_WORDS: [&str; 18] = [
    "the",
    "bridge",
    "is",
    "gonna",
    "fall",
    "rusted",
    "over",
    "near",
    "Ohioans",
    "newyork",
    "café",
    "ñandú",
    "<LOCATION>",
    "location",
    "river",
    "123",
    "straße",
    "🙂",
];

pub const SEPARATORS: [&str; 7] = [" ", "  ", ", ", ". ", "\n", "-", "!"];

/// Text mixing gazetteer entries, near misses, unicode and literal mask
/// tokens with assorted separators.
pub fn random_text(rng: &mut ChaCha8Rng) -> String {
    let n = rng.random_range(0..=24);
    let mut out = String::new();
    for i in 0..n {
        if i > 0 || rng.random_bool(0.2) {
            out.push_str(SEPARATORS[rng.random_range(0..SEPARATORS.len())]);
        }
        let word = if rng.random_bool(0.35) {
            GAZETTEER_WORDS[rng.random_range(0..GAZETTEER_WORDS.len())]
        } else {
            FILLER_WORDS[rng.random_range(0..FILLER_WORDS.len())]
        };
        out.push_str(word);
    }
    out
}

/// Merged regions by the whitespace rule, walked directly from the spans.
pub fn merged_regions(text: &str, spans: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let chars: Vec<char> = text.chars().collect();
    let mut sorted = spans.to_vec();
    sorted.sort();
    let mut out: Vec<(usize, usize)> = Vec::new();
    for (s, e) in sorted {
        if let Some(last) = out.last_mut() {
            let gap_is_space = s <= last.1 || chars[last.1..s].iter().all(|c| c.is_whitespace());
            if gap_is_space {
                last.1 = last.1.max(e);
                continue;
            }
        }
        out.push((s, e));
    }
    out
}

// ---- llm responses ----

/// (raw response, expected ids, expected `concern` per id).
pub fn adversarial_responses() -> Vec<(String, Vec<&'static str>, BTreeMap<&'static str, bool>)> {
    let one = |v: bool| BTreeMap::from([("1", v)]);
    let two = BTreeMap::from([("1", true), ("2", false)]);
    let arr = r#"[{"id": "1", "concern": true, "locations": ["Lowell"], "leaning": "bipartisan"}, {"id": "2", "concern": false, "locations": [], "leaning": "liberal"}]"#;
    vec![
        (arr.to_string(), vec!["1", "2"], two.clone()),
        (format!("Sure! Here is the JSON you asked for:\n{arr}"), vec!["1", "2"], two.clone()),
        (format!("{arr}\n\nLet me know if you need anything else."), vec!["1", "2"], two.clone()),
        (format!("```json\n{arr}\n```"), vec!["1", "2"], two.clone()),
        (format!("Here you go:\n```\n{arr}\n```\nThanks!"), vec!["1", "2"], two.clone()),
        (format!("Note [see below]: {arr}"), vec!["1", "2"], two.clone()),
        (format!("{{not json at all}} then {arr}"), vec!["1", "2"], two.clone()),
        (format!("{arr} and also {{\"id\": \"1\", \"concern\": false}}"), vec!["1", "2"], two.clone()),
        (
            r#"{"results": [{"id": "1", "concern": true}, {"id": "2", "concern": false}]}"#.into(),
            vec!["1", "2"],
            two.clone(),
        ),
        (
            r#"[{"id": 1, "concern": true}, {"id": 2, "concern": false}]"#.into(),
            vec!["1", "2"],
            two.clone(),
        ),
        (
            r#"[{"id": "1", "concern": true, "locations": ["a } b"]}]"#.into(),
            vec!["1"],
            one(true),
        ),
        (
            r#"[{"id": "1", "concern": true, "note": "brackets ]]] and {{{"}]"#.into(),
            vec!["1"],
            one(true),
        ),
        (
            r#"[{"id": "1", "concern": false, "note": "he said \"}]\" loudly"}]"#.into(),
            vec!["1"],
            one(false),
        ),
        (r#"{"concern": true, "locations": ["Ohio"]}"#.into(), vec!["1"], one(true)),
        (
            "I think these are the answers.\n\n[\n  {\n    \"id\": \"1\",\n    \"concern\": true\n  }\n]\n".into(),
            vec!["1"],
            one(true),
        ),
        (
            "```\n[{\"id\": \"1\", \"concern\": false}]\n```\n```\n[{\"id\": \"1\", \"concern\": true}]\n```".into(),
            vec!["1"],
            one(false),
        ),
        (
            r#"[{"id": " 1 ", "concern": true}, {"id": "7", "concern": true}]"#.into(),
            vec!["1"],
            one(true),
        ),
        (
            "Analysis: comment 1 mentions a {specific} bridge.\nAnswer: [{\"id\":\"1\",\"concern\":true}]".into(),
            vec!["1"],
            one(true),
        ),
        (
            "\u{feff}  [{\"id\": \"1\", \"concern\": true, \"leaning\": \"conservative\"}]  ".into(),
            vec!["1"],
            one(true),
        ),
        (
            "[{\"id\": \"1\", \"concern\": true, \"locations\": [\"Zürich\", \"日本\"]}] 🙂".into(),
            vec!["1"],
            one(true),
        ),
    ]
}

/// Responses that must produce an error: no JSON, unbalanced JSON, or
/// answers that skip a requested id.
pub fn malformed_responses() -> Vec<(String, Vec<&'static str>)> {
    vec![
        ("".into(), vec!["1"]),
        ("I cannot help with that.".into(), vec!["1"]),
        (
            "[{\"id\": \"1\", \"concern\": true}, {\"id\": \"2\", \"conc".into(),
            vec!["1", "2"],
        ),
        ("{\"id\": \"1\", \"concern\": tru}".into(), vec!["1"]),
        (
            "```json\n[{'id': '1', 'concern': True}]\n```".into(),
            vec!["1"],
        ),
        (
            "[{\"id\": \"1\", \"concern\": true}]".into(),
            vec!["1", "2"],
        ),
        ("[{\"id\": \"3\", \"concern\": true}]".into(), vec!["1"]),
        ("[1, 2, 3]".into(), vec!["1"]),
        ("{\"id\": \"1\", \"concern\": true]".into(), vec!["1"]),
        (
            "[{\"concern\": true}, {\"concern\": false}]".into(),
            vec!["1", "2"],
        ),
    ]
}
