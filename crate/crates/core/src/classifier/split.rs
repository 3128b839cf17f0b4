use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::annotation::LabeledExample;
use crate::hashing::{json_hash, sub_seed};

pub const DEFAULT_TRAIN_RATIO: f64 = 0.7;
pub const DEFAULT_RUNS: usize = 5;

/// How the five evaluation runs are formed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Protocol {
    /// Every run trains on the same split with its own seed.
    #[default]
    RepeatedRuns,
    /// Run `i` tests on stratified fold `i` and trains on the rest.
    KFold { k: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub dataset_hash: String,
    pub train_ids: Vec<String>,
    pub test_ids: Vec<String>,
    pub run_seeds: Vec<u64>,
    pub ratio: (f64, f64),
    #[serde(default)]
    pub protocol: Protocol,
    /// Fold membership under `KFold`; empty otherwise.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub folds: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SplitError {
    #[error("dataset is empty")]
    Empty,
    #[error("dataset holds only class {0}; both classes are required")]
    SingleClass(u8),
    #[error("train ratio must lie in (0,1), got {0}")]
    BadRatio(f64),
    #[error("k-fold needs 2 <= k <= dataset size, got k = {0}")]
    BadFolds(usize),
    #[error("manifest was built for dataset {expected}, not {found}")]
    DatasetMismatch { expected: String, found: String },
    #[error("manifest ids are not all in the dataset: {0:?}")]
    UnknownIds(Vec<String>),
    #[error("{0}")]
    Io(String),
}

/// Hash of the labeled content of a dataset, independent of row order.
pub fn dataset_hash(dataset: &[LabeledExample]) -> String {
    let mut rows: Vec<(&str, &str, Option<&str>, u8)> = dataset
        .iter()
        .map(|e| {
            (
                e.post_id.as_str(),
                e.text.as_str(),
                e.masked_text.as_deref(),
                e.label,
            )
        })
        .collect();
    rows.sort();
    json_hash(&rows)
}

fn class_ids(
    dataset: &[LabeledExample],
    rng: &mut ChaCha8Rng,
) -> Result<[Vec<String>; 2], SplitError> {
    if dataset.is_empty() {
        return Err(SplitError::Empty);
    }
    let mut classes: [Vec<String>; 2] = [Vec::new(), Vec::new()];
    for e in dataset {
        classes[usize::from(e.label.min(1))].push(e.post_id.clone());
    }
    for (c, ids) in classes.iter().enumerate() {
        if ids.is_empty() {
            return Err(SplitError::SingleClass(1 - c as u8));
        }
    }
    for ids in &mut classes {
        ids.sort();
        ids.shuffle(rng);
    }
    Ok(classes)
}

/// Per-class train quotas summing to `total`: floors of the proportional
/// shares, with leftovers going to the largest fractional parts (ties to
/// the larger class, then the positive class).
fn quotas(sizes: [usize; 2], total: usize) -> [usize; 2] {
    let n: usize = sizes.iter().sum();
    let exact: Vec<f64> = sizes
        .iter()
        .map(|s| (*s * total) as f64 / n as f64)
        .collect();
    let mut q = [exact[0].floor() as usize, exact[1].floor() as usize];
    let mut order = [0usize, 1];
    order.sort_by(|a, b| {
        let fa = exact[*a] - exact[*a].floor();
        let fb = exact[*b] - exact[*b].floor();
        fb.total_cmp(&fa)
            .then(sizes[*b].cmp(&sizes[*a]))
            .then(b.cmp(a))
    });
    let mut left = total - q[0] - q[1];
    for c in order.iter().cycle() {
        if left == 0 {
            break;
        }
        if q[*c] < sizes[*c] {
            q[*c] += 1;
            left -= 1;
        }
    }
    q
}

fn run_seeds(seed: u64, runs: usize) -> Vec<u64> {
    (0..runs)
        .map(|i| sub_seed(seed, &format!("run-{i}")))
        .collect()
}

/// Stratified train/test split with |train| = floor(ratio · N).
pub fn make_splits(
    dataset: &[LabeledExample],
    ratio: f64,
    seed: u64,
) -> Result<SplitManifest, SplitError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(SplitError::BadRatio(ratio));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let classes = class_ids(dataset, &mut rng)?;
    // The epsilon keeps products like 0.7 · 30 from flooring to 20.
    let n_train = ((dataset.len() as f64) * ratio + 1e-9).floor() as usize;
    let q = quotas([classes[0].len(), classes[1].len()], n_train);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (ids, take) in classes.iter().zip(q) {
        train.extend_from_slice(&ids[..take]);
        test.extend_from_slice(&ids[take..]);
    }
    train.sort();
    test.sort();
    Ok(SplitManifest {
        dataset_hash: dataset_hash(dataset),
        train_ids: train,
        test_ids: test,
        run_seeds: run_seeds(seed, DEFAULT_RUNS),
        ratio: (ratio, 1.0 - ratio),
        protocol: Protocol::RepeatedRuns,
        folds: Vec::new(),
    })
}

/// Stratified `k` folds dealt round-robin from each shuffled class.
/// `train_ids`/`test_ids` hold fold 0's split.
pub fn make_kfold(
    dataset: &[LabeledExample],
    k: usize,
    seed: u64,
) -> Result<SplitManifest, SplitError> {
    if k < 2 || k > dataset.len() {
        return Err(SplitError::BadFolds(k));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let classes = class_ids(dataset, &mut rng)?;
    let mut folds: Vec<Vec<String>> = vec![Vec::new(); k];
    for (i, id) in classes.iter().flatten().enumerate() {
        folds[i % k].push(id.clone());
    }
    for f in &mut folds {
        f.sort();
    }
    let mut manifest = SplitManifest {
        dataset_hash: dataset_hash(dataset),
        train_ids: Vec::new(),
        test_ids: Vec::new(),
        run_seeds: run_seeds(seed, k),
        ratio: (1.0 - 1.0 / k as f64, 1.0 / k as f64),
        protocol: Protocol::KFold { k },
        folds,
    };
    let (train, test) = manifest.run_split(0);
    manifest.train_ids = train;
    manifest.test_ids = test;
    Ok(manifest)
}

impl SplitManifest {
    pub fn runs(&self) -> usize {
        self.run_seeds.len()
    }

    /// (train ids, test ids) for run `i`.
    pub fn run_split(&self, i: usize) -> (Vec<String>, Vec<String>) {
        match self.protocol {
            Protocol::RepeatedRuns => (self.train_ids.clone(), self.test_ids.clone()),
            Protocol::KFold { .. } => {
                let mut train: Vec<String> = self
                    .folds
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .flat_map(|(_, f)| f.iter().cloned())
                    .collect();
                train.sort();
                (train, self.folds[i].clone())
            }
        }
    }

    pub fn hash(&self) -> String {
        json_hash(self)
    }

    /// Checks that the manifest was built for `dataset`.
    pub fn check(&self, dataset: &[LabeledExample]) -> Result<(), SplitError> {
        let found = dataset_hash(dataset);
        if found != self.dataset_hash {
            return Err(SplitError::DatasetMismatch {
                expected: self.dataset_hash.clone(),
                found,
            });
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SplitError> {
        let body = std::fs::read_to_string(path.as_ref())
            .map_err(|e| SplitError::Io(format!("{}: {e}", path.as_ref().display())))?;
        serde_json::from_str(&body)
            .map_err(|e| SplitError::Io(format!("{}: {e}", path.as_ref().display())))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), SplitError> {
        let body = serde_json::to_string_pretty(self).expect("manifest serializes") + "\n";
        std::fs::write(path.as_ref(), body)
            .map_err(|e| SplitError::Io(format!("{}: {e}", path.as_ref().display())))
    }
}
