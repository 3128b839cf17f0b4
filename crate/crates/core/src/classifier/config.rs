use std::fmt;

use serde::{Deserialize, Serialize};

use super::split::Protocol;

/// Which text field a model trains and predicts on.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskingVariant {
    #[default]
    Mask,
    Nomask,
}

impl fmt::Display for MaskingVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MaskingVariant::Mask => "mask",
            MaskingVariant::Nomask => "nomask",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    pub name: String,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub weight_decay: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            name: "adam".into(),
            learning_rate: 2e-5,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            weight_decay: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub model_identifier: String,
    pub masking: MaskingVariant,
    pub epochs: usize,
    pub optimizer: OptimizerConfig,
    pub batch_size: usize,
    pub max_seq_len: usize,
    /// Overrides the manifest's run seeds when set.
    pub seed: Option<u64>,
    pub protocol: Protocol,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            model_identifier: "bow-logreg".into(),
            masking: MaskingVariant::Mask,
            epochs: 5,
            optimizer: OptimizerConfig::default(),
            batch_size: 16,
            max_seq_len: 512,
            seed: None,
            protocol: Protocol::RepeatedRuns,
        }
    }
}

impl TrainConfig {
    /// Violations as `field: message` strings, prefixed with `prefix`.
    pub fn validate(&self, prefix: &str) -> Vec<String> {
        let mut out = Vec::new();
        if self.model_identifier.trim().is_empty() {
            out.push(format!("{prefix}.model_identifier: must not be empty"));
        }
        if self.epochs == 0 {
            out.push(format!("{prefix}.epochs: must be >= 1"));
        }
        if self.batch_size == 0 {
            out.push(format!("{prefix}.batch_size: must be >= 1"));
        }
        if self.max_seq_len == 0 {
            out.push(format!("{prefix}.max_seq_len: must be >= 1"));
        }
        if self.optimizer.name != "adam" {
            out.push(format!(
                "{prefix}.optimizer.name: only \"adam\" is supported, got {:?}",
                self.optimizer.name
            ));
        }
        if !(self.optimizer.learning_rate > 0.0 && self.optimizer.learning_rate.is_finite()) {
            out.push(format!(
                "{prefix}.optimizer.learning_rate: must be positive"
            ));
        }
        if !(0.0..1.0).contains(&self.optimizer.beta1)
            || !(0.0..1.0).contains(&self.optimizer.beta2)
        {
            out.push(format!("{prefix}.optimizer: betas must lie in [0,1)"));
        }
        if let Protocol::KFold { k } = self.protocol {
            if k < 2 {
                out.push(format!("{prefix}.protocol.k: must be >= 2"));
            }
        }
        out
    }
}
