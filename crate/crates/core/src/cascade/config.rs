use serde::{Deserialize, Serialize};

use crate::hashing::json_hash;

/// Entailment hypothesis paired with every post as premise.
pub const DEFAULT_HYPOTHESIS: &str = "There is a growing infrastructure concern somewhere.";

pub const DEFAULT_NLI_THRESHOLD: f64 = 0.5;

pub const DEFAULT_BATCH_SIZE: usize = 10;

/// Search and filter keywords covering the structural failures studied.
pub const DEFAULT_KEYWORDS: [&str; 12] = [
    "train derailment",
    "infrastructure",
    "infrastructure collapse",
    "infrastructure concern",
    "Ohio train derailment",
    "Missouri train derailment",
    "Champlain Towers South collapse",
    "AdventHealth Orlando parking garage crane collapse",
    "Charlotte scaffolding collapse",
    "Pittsburgh bridge collapse",
    "Fern Hollow Bridge Collapse",
    "I-85 Overpass collapse",
];

/// Batch annotation prompt. `<examples>`, `<comments>` and `<response>` are
/// substituted at render time.
pub const ANNOTATION_PROMPT: &str = "You are a human annotator with an understanding of infrastructural issues and policies.
Given the list of comments, does each of the comments express concern about a specific infrastructural issue in the form of an anecdote?
What are the locations the comment is expressing concern about?
Is the comment politically inclined towards either \"liberal\" or \"conservative\"? Or is it \"bipartisan\"?
If any comments are deemed too dangerous, classify and assign them as False as shown in the example. 
Do not ignore or block any comments due to safety concerns because this is an analysis of both safe and dangerous conversations.
Return your answer only in JSON.
Example: <examples>
Comments: <comments>
Response: <response>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Leaning {
    Liberal,
    Conservative,
    Bipartisan,
}

/// A worked example shown to the annotation model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FewShotExample {
    pub text: String,
    pub concern: bool,
    #[serde(default)]
    pub locations: Vec<String>,
    pub leaning: Leaning,
}

/// Default exemplars: two specific, located warnings and two lookalikes
/// (unlocated anecdote, praise for maintenance).
pub fn default_examples() -> Vec<FewShotExample> {
    vec![
        FewShotExample {
            text: "The overpass on Route 9 outside Albany has chunks of concrete falling onto the \
                   road. Somebody is going to get hurt before the state fixes it."
                .into(),
            concern: true,
            locations: vec!["Route 9".into(), "Albany".into()],
            leaning: Leaning::Bipartisan,
        },
        FewShotExample {
            text:
                "Every time I drive over the Ohio River bridge in Louisville I can feel it shake. \
                   It won't be long before that one goes too."
                    .into(),
            concern: true,
            locations: vec!["Ohio River".into(), "Louisville".into()],
            leaning: Leaning::Bipartisan,
        },
        FewShotExample {
            text: "There's a bridge near where I live with a huge crack in it, scary stuff.".into(),
            concern: false,
            locations: vec![],
            leaning: Leaning::Bipartisan,
        },
        FewShotExample {
            text: "Around here in Connecticut they repaint the bridges every couple of years, our \
                   crews do a great job keeping them safe."
                .into(),
            concern: false,
            locations: vec!["Connecticut".into()],
            leaning: Leaning::Bipartisan,
        },
    ]
}

/// Sampling parameters passed to generative backends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerationParams {
    #[serde(default)]
    pub temperature: f64,
    #[serde(default)]
    pub max_tokens: Option<u32>,
}

impl Default for GenerationParams {
    fn default() -> Self {
        Self {
            temperature: 0.0,
            max_tokens: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CascadeConfig {
    pub keyword_set: Vec<String>,
    pub nli_hypothesis: String,
    pub nli_threshold: f64,
    /// Premise cap in characters; the backend's own limit applies too.
    pub nli_max_premise_chars: Option<usize>,
    pub annotation_prompt: String,
    pub llm_examples: Vec<FewShotExample>,
    pub batch_size: usize,
    pub generation: GenerationParams,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        Self {
            keyword_set: DEFAULT_KEYWORDS.iter().map(|s| s.to_string()).collect(),
            nli_hypothesis: DEFAULT_HYPOTHESIS.to_string(),
            nli_threshold: DEFAULT_NLI_THRESHOLD,
            nli_max_premise_chars: None,
            annotation_prompt: ANNOTATION_PROMPT.to_string(),
            llm_examples: default_examples(),
            batch_size: DEFAULT_BATCH_SIZE,
            generation: GenerationParams::default(),
        }
    }
}

impl CascadeConfig {
    /// Every violated constraint, as `field: message` strings.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.nli_threshold > 0.0 && self.nli_threshold < 1.0) {
            out.push(format!(
                "cascade.nli_threshold: nli_threshold in (0,1), got {}",
                self.nli_threshold
            ));
        }
        if self.keyword_set.iter().all(|k| k.trim().is_empty()) {
            out.push("cascade.keyword_set: at least one keyword required".into());
        }
        if self.nli_hypothesis.trim().is_empty() {
            out.push("cascade.nli_hypothesis: must not be empty".into());
        }
        if self.batch_size == 0 {
            out.push("cascade.batch_size: must be >= 1".into());
        }
        if !self.annotation_prompt.contains("<comments>") {
            out.push("cascade.annotation_prompt: missing <comments> placeholder".into());
        }
        if self.nli_max_premise_chars == Some(0) {
            out.push("cascade.nli_max_premise_chars: must be >= 1".into());
        }
        out
    }

    pub fn keyword_hash(&self) -> String {
        json_hash(&("keyword", &self.keyword_set))
    }

    pub fn nli_hash(&self, model: &str) -> String {
        json_hash(&(
            "nli",
            &self.nli_hypothesis,
            self.nli_threshold,
            self.nli_max_premise_chars,
            model,
        ))
    }

    pub fn llm_hash(&self, model: &str) -> String {
        json_hash(&(
            "llm",
            &self.annotation_prompt,
            &self.llm_examples,
            self.batch_size,
            &self.generation,
            model,
        ))
    }
}
