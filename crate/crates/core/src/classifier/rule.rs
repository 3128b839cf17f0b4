//! A fixed keyword-rule classifier used as a deterministic stand-in model.

use serde_json::Value;

use super::config::TrainConfig;
use super::model::{
    Classifier, ClassifierError, Prediction, TrainBackend, TrainError, TrainExample,
};
use crate::backends::{RuleAnnotator, NLI_CUES};

pub const RULE_MODEL_ID: &str = "rule-concern";

/// Positive when the rule annotator would call the text a concern. Scores
/// grow with the number of distinct infrastructure cue words so flagged
/// posts have a meaningful ranking.
#[derive(Debug, Clone, Default)]
pub struct RuleConcern {
    judge: RuleAnnotator,
}

impl RuleConcern {
    pub fn cue_hits(text: &str) -> usize {
        let lower = text.to_lowercase();
        NLI_CUES.iter().filter(|c| lower.contains(*c)).count()
    }
}

impl Classifier for RuleConcern {
    fn predict(&self, text: &str) -> Result<Prediction, ClassifierError> {
        let positive = self.judge.judge(text).0;
        let bump = 0.1 * Self::cue_hits(text).min(4) as f64;
        let score = if positive { 0.6 + bump } else { bump };
        Ok(Prediction {
            label: u8::from(positive),
            score: score.min(1.0),
        })
    }
}

/// Training backend whose "training" only records the rule's fixed loss.
#[derive(Debug, Clone, Copy, Default)]
pub struct RuleConcernBackend;

impl TrainBackend for RuleConcernBackend {
    fn model_identifier(&self) -> &str {
        RULE_MODEL_ID
    }

    fn train(
        &self,
        examples: &[TrainExample],
        config: &TrainConfig,
        _seed: u64,
    ) -> Result<(Value, Vec<f64>), TrainError> {
        let model = RuleConcern::default();
        let mut loss = 0.0;
        for e in examples {
            let p = model
                .predict(&e.text)
                .map_err(|err| TrainError {
                    message: err.message,
                    partial_log: Vec::new(),
                })?
                .score
                .clamp(1e-6, 1.0 - 1e-6);
            loss -= if e.label == 1 { p.ln() } else { (1.0 - p).ln() };
        }
        let mean = loss / examples.len().max(1) as f64;
        Ok((Value::Null, vec![mean; config.epochs]))
    }

    fn load(&self, _weights: &Value) -> Result<Box<dyn Classifier>, ClassifierError> {
        Ok(Box::new(RuleConcern::default()))
    }
}
