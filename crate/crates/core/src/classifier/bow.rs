//! Hashed bag-of-n-grams logistic regression trained with Adam.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::TrainConfig;
use super::model::{
    Classifier, ClassifierError, Prediction, TrainBackend, TrainError, TrainExample,
};
use crate::hashing::fnv1a64;
use crate::masking::DEFAULT_MASK_TOKEN;

pub const BOW_MODEL_ID: &str = "bow-logreg";
const DIM: u64 = 1 << 20;
const MASK_WORD: &str = "__loc__";

/// Lowercased alphanumeric tokens; the mask token becomes one word.
pub fn tokenize(text: &str, max_tokens: usize) -> Vec<String> {
    let text = text.replace(DEFAULT_MASK_TOKEN, &format!(" {MASK_WORD} "));
    text.to_lowercase()
        .split(|c: char| !(c.is_alphanumeric() || c == '_'))
        .filter(|t| !t.is_empty())
        .take(max_tokens)
        .map(str::to_string)
        .collect()
}

/// Unit-norm binary features over unigrams and bigrams, sorted by index.
fn features(text: &str, max_tokens: usize) -> Vec<(u32, f64)> {
    let tokens = tokenize(text, max_tokens);
    let mut idx: Vec<u32> = tokens
        .iter()
        .map(|t| (fnv1a64(t.as_bytes()) % DIM) as u32)
        .chain(
            tokens
                .windows(2)
                .map(|w| (fnv1a64(format!("{} {}", w[0], w[1]).as_bytes()) % DIM) as u32),
        )
        .collect();
    idx.sort_unstable();
    idx.dedup();
    let v = if idx.is_empty() {
        0.0
    } else {
        1.0 / (idx.len() as f64).sqrt()
    };
    idx.into_iter().map(|i| (i, v)).collect()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn log_loss(p: f64, y: f64) -> f64 {
    let p = p.clamp(1e-12, 1.0 - 1e-12);
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct Weights {
    max_seq_len: usize,
    bias: f64,
    /// (feature index, weight), sorted by index.
    weights: Vec<(u32, f64)>,
}

struct BowModel {
    max_seq_len: usize,
    bias: f64,
    weights: HashMap<u32, f64>,
}

impl BowModel {
    fn score(&self, feats: &[(u32, f64)]) -> f64 {
        let z = self.bias
            + feats
                .iter()
                .map(|(i, v)| self.weights.get(i).copied().unwrap_or(0.0) * v)
                .sum::<f64>();
        sigmoid(z)
    }
}

impl Classifier for BowModel {
    fn predict(&self, text: &str) -> Result<Prediction, ClassifierError> {
        let score = self.score(&features(text, self.max_seq_len));
        Ok(Prediction {
            label: u8::from(score > 0.5),
            score,
        })
    }
}

#[derive(Default)]
struct Adam {
    m: f64,
    v: f64,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BowLogReg;

impl TrainBackend for BowLogReg {
    fn model_identifier(&self) -> &str {
        BOW_MODEL_ID
    }

    fn train(
        &self,
        examples: &[TrainExample],
        config: &TrainConfig,
        seed: u64,
    ) -> Result<(Value, Vec<f64>), TrainError> {
        if examples.is_empty() {
            return Err(TrainError {
                message: "no training examples".into(),
                partial_log: Vec::new(),
            });
        }
        let opt = &config.optimizer;
        let data: Vec<(Vec<(u32, f64)>, f64)> = examples
            .iter()
            .map(|e| (features(&e.text, config.max_seq_len), f64::from(e.label)))
            .collect();
        let mut model = BowModel {
            max_seq_len: config.max_seq_len,
            bias: 0.0,
            weights: HashMap::new(),
        };
        let mut state: HashMap<u32, Adam> = HashMap::new();
        let mut bias_state = Adam::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut order: Vec<usize> = (0..data.len()).collect();
        let mut log = Vec::with_capacity(config.epochs);
        let mut t = 0i32;

        let step = |s: &mut Adam, g: f64, t: i32| {
            s.m = opt.beta1 * s.m + (1.0 - opt.beta1) * g;
            s.v = opt.beta2 * s.v + (1.0 - opt.beta2) * g * g;
            let m_hat = s.m / (1.0 - opt.beta1.powi(t));
            let v_hat = s.v / (1.0 - opt.beta2.powi(t));
            opt.learning_rate * m_hat / (v_hat.sqrt() + opt.epsilon)
        };

        for _ in 0..config.epochs {
            order.shuffle(&mut rng);
            let mut total = 0.0;
            for batch in order.chunks(config.batch_size) {
                t += 1;
                let mut grads: BTreeMap<u32, f64> = BTreeMap::new();
                let mut g_bias = 0.0;
                for &k in batch {
                    let (feats, y) = &data[k];
                    let p = model.score(feats);
                    total += log_loss(p, *y);
                    let err = (p - y) / batch.len() as f64;
                    g_bias += err;
                    for (i, v) in feats {
                        *grads.entry(*i).or_insert(0.0) += err * v;
                    }
                }
                for (i, g) in grads {
                    let w = model.weights.entry(i).or_insert(0.0);
                    let g = g + opt.weight_decay * *w;
                    *w -= step(state.entry(i).or_default(), g, t);
                }
                model.bias -= step(&mut bias_state, g_bias, t);
            }
            let mean = total / data.len() as f64;
            if !mean.is_finite() {
                return Err(TrainError {
                    message: "loss diverged".into(),
                    partial_log: log,
                });
            }
            log.push(mean);
        }

        let mut weights: Vec<(u32, f64)> = model
            .weights
            .into_iter()
            .filter(|(_, w)| *w != 0.0)
            .collect();
        weights.sort_by_key(|(i, _)| *i);
        let out = Weights {
            max_seq_len: config.max_seq_len,
            bias: model.bias,
            weights,
        };
        Ok((serde_json::to_value(out).expect("weights serialize"), log))
    }

    fn load(&self, weights: &Value) -> Result<Box<dyn Classifier>, ClassifierError> {
        let w: Weights = serde_json::from_value(weights.clone())
            .map_err(|e| ClassifierError::new(format!("bad {BOW_MODEL_ID} weights: {e}")))?;
        Ok(Box::new(BowModel {
            max_seq_len: w.max_seq_len,
            bias: w.bias,
            weights: w.weights.into_iter().collect(),
        }))
    }
}
