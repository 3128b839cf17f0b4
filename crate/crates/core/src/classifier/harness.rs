use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::config::{MaskingVariant, TrainConfig};
use super::metrics::{
    aggregate, compute_macro_metrics, ConfusionMatrix, Dispersion, MacroMetrics, MetricsError,
};
use super::model::{
    model_input, Classifier, ClassifierError, ModelArtifact, RunArtifact, TrainBackend, TrainError,
    TrainExample,
};
use super::split::{Protocol, SplitError, SplitManifest};
use crate::annotation::LabeledExample;
use crate::hashing::sub_seed;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Split(#[from] SplitError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("invalid train config: {}", .0.join("; "))]
    Config(Vec<String>),
    #[error("backend {backend} cannot train {requested}")]
    Unsupported { backend: String, requested: String },
    #[error("run {run}: {error}")]
    Train {
        run: usize,
        error: TrainError,
        /// Runs that finished before the failure.
        completed: Vec<RunArtifact>,
    },
    #[error("artifact was trained against manifest {expected}, not {found}")]
    ManifestMismatch { expected: String, found: String },
    #[error("run {0} has an empty test split")]
    EmptyTest(usize),
}

fn by_id(dataset: &[LabeledExample]) -> HashMap<&str, &LabeledExample> {
    dataset.iter().map(|e| (e.post_id.as_str(), e)).collect()
}

fn select<'a>(
    index: &HashMap<&str, &'a LabeledExample>,
    ids: &[String],
) -> Result<Vec<&'a LabeledExample>, SplitError> {
    let missing: Vec<String> = ids
        .iter()
        .filter(|id| !index.contains_key(id.as_str()))
        .cloned()
        .collect();
    if !missing.is_empty() {
        return Err(SplitError::UnknownIds(missing));
    }
    Ok(ids.iter().map(|id| index[id.as_str()]).collect())
}

fn seeds(manifest: &SplitManifest, config: &TrainConfig) -> Vec<u64> {
    match config.seed {
        Some(s) => (0..manifest.runs())
            .map(|i| sub_seed(s, &format!("run-{i}")))
            .collect(),
        None => manifest.run_seeds.clone(),
    }
}

/// Trains one parameter set per manifest run. Runs execute in parallel;
/// results are ordered by run.
pub fn train(
    dataset: &[LabeledExample],
    manifest: &SplitManifest,
    config: &TrainConfig,
    backend: &dyn TrainBackend,
) -> Result<ModelArtifact, HarnessError> {
    let problems = config.validate("train");
    if !problems.is_empty() {
        return Err(HarnessError::Config(problems));
    }
    if backend.model_identifier() != config.model_identifier {
        return Err(HarnessError::Unsupported {
            backend: backend.model_identifier().to_string(),
            requested: config.model_identifier.clone(),
        });
    }
    manifest.check(dataset)?;
    let index = by_id(dataset);
    let mut inputs = Vec::new();
    for run in 0..manifest.runs() {
        let (train_ids, _) = manifest.run_split(run);
        let examples = select(&index, &train_ids)?
            .into_iter()
            .map(|e| {
                Ok(TrainExample {
                    text: model_input(e, config.masking)?.to_string(),
                    label: e.label,
                })
            })
            .collect::<Result<Vec<_>, ClassifierError>>()?;
        inputs.push(examples);
    }
    let seeds = seeds(manifest, config);
    let results: Vec<Result<RunArtifact, TrainError>> = std::thread::scope(|s| {
        let handles: Vec<_> = inputs
            .iter()
            .zip(&seeds)
            .enumerate()
            .map(|(run, (examples, seed))| {
                s.spawn(move || {
                    let (weights, loss_log) = backend.train(examples, config, *seed)?;
                    Ok(RunArtifact {
                        run,
                        seed: *seed,
                        loss_log,
                        weights,
                    })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("training thread panicked"))
            .collect()
    });
    let mut runs = Vec::new();
    for (run, r) in results.into_iter().enumerate() {
        match r {
            Ok(a) => runs.push(a),
            Err(error) => {
                return Err(HarnessError::Train {
                    run,
                    error,
                    completed: runs,
                })
            }
        }
    }
    Ok(ModelArtifact {
        artifact_id: String::new(),
        model_identifier: config.model_identifier.clone(),
        masking: config.masking,
        config: config.clone(),
        dataset_hash: manifest.dataset_hash.clone(),
        manifest_hash: manifest.hash(),
        runs,
    }
    .identify())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEval {
    pub run: usize,
    pub seed: u64,
    pub n_test: usize,
    pub metrics: MacroMetrics,
    pub confusion: ConfusionMatrix,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// One results-table row: a model under one masking variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: String,
    pub masking: MaskingVariant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub artifact_id: Option<String>,
    pub manifest_hash: String,
    pub protocol: Protocol,
    pub runs: Vec<RunEval>,
    pub mean: MacroMetrics,
    pub dispersion: Dispersion,
}

/// Scores one classifier per run on that run's test split.
pub fn evaluate_classifiers(
    model: &str,
    classifiers: &[(u64, Box<dyn Classifier>)],
    dataset: &[LabeledExample],
    manifest: &SplitManifest,
    masking: MaskingVariant,
) -> Result<EvalReport, HarnessError> {
    manifest.check(dataset)?;
    let index = by_id(dataset);
    let mut runs = Vec::new();
    for (run, (seed, clf)) in classifiers.iter().enumerate() {
        let (_, test_ids) = manifest.run_split(run);
        if test_ids.is_empty() {
            return Err(HarnessError::EmptyTest(run));
        }
        let test = select(&index, &test_ids)?;
        let mut preds = Vec::with_capacity(test.len());
        for e in &test {
            preds.push(clf.predict(model_input(e, masking)?)?.label);
        }
        let golds: Vec<u8> = test.iter().map(|e| e.label).collect();
        let out = compute_macro_metrics(&preds, &golds)?;
        runs.push(RunEval {
            run,
            seed: *seed,
            n_test: test.len(),
            metrics: out.metrics,
            confusion: out.confusion,
            warnings: out.warnings,
        });
    }
    let per_run: Vec<MacroMetrics> = runs.iter().map(|r| r.metrics).collect();
    let (mean, dispersion) = aggregate(&per_run);
    Ok(EvalReport {
        model: model.to_string(),
        masking,
        artifact_id: None,
        manifest_hash: manifest.hash(),
        protocol: manifest.protocol,
        runs,
        mean,
        dispersion,
    })
}

/// Evaluates every run of a trained artifact on its manifest's test split.
pub fn evaluate(
    artifact: &ModelArtifact,
    dataset: &[LabeledExample],
    manifest: &SplitManifest,
) -> Result<EvalReport, HarnessError> {
    let found = manifest.hash();
    if artifact.manifest_hash != found {
        return Err(HarnessError::ManifestMismatch {
            expected: artifact.manifest_hash.clone(),
            found,
        });
    }
    let classifiers = (0..artifact.runs.len())
        .map(|i| Ok((artifact.runs[i].seed, artifact.classifier(i)?)))
        .collect::<Result<Vec<_>, ClassifierError>>()?;
    let mut report = evaluate_classifiers(
        &artifact.model_identifier,
        &classifiers,
        dataset,
        manifest,
        artifact.masking,
    )?;
    report.artifact_id = Some(artifact.artifact_id.clone());
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::config::OptimizerConfig;
    use crate::classifier::split::{make_kfold, make_splits, tests::example};
    use crate::classifier::{BowLogReg, Prediction};

    struct Oracle(HashMap<String, u8>);

    impl Classifier for Oracle {
        fn predict(&self, text: &str) -> Result<Prediction, ClassifierError> {
            let label = self.0[text];
            Ok(Prediction {
                label,
                score: f64::from(label),
            })
        }
    }

    struct Constant(u8);

    impl Classifier for Constant {
        fn predict(&self, _: &str) -> Result<Prediction, ClassifierError> {
            Ok(Prediction {
                label: self.0,
                score: f64::from(self.0),
            })
        }
    }

    fn dataset(n: usize, positives: usize) -> Vec<LabeledExample> {
        (0..n)
            .map(|i| {
                let pos = i < positives;
                let text = if pos {
                    format!("item {i} the bridge in <LOCATION> is going to fall")
                } else {
                    format!("item {i} lovely weather")
                };
                let mut e = example(
                    &format!("p{i:03}"),
                    &text.replace("<LOCATION>", "Ohio"),
                    u8::from(pos),
                );
                e.masked_text = Some(text);
                e
            })
            .collect()
    }

    #[test]
    fn perfect_model_scores_one_with_zero_variance() {
        let ds = dataset(40, 10);
        let m = make_splits(&ds, 0.7, 1).unwrap();
        let gold: HashMap<String, u8> = ds
            .iter()
            .map(|e| (e.masked_text.clone().unwrap(), e.label))
            .collect();
        let clfs: Vec<(u64, Box<dyn Classifier>)> = m
            .run_seeds
            .iter()
            .map(|s| (*s, Box::new(Oracle(gold.clone())) as Box<dyn Classifier>))
            .collect();
        let r = evaluate_classifiers("oracle", &clfs, &ds, &m, MaskingVariant::Mask).unwrap();
        assert_eq!(r.mean.as_array(), [1.0; 4]);
        assert_eq!(r.runs.len(), 5);
        let d = r.dispersion;
        assert_eq!([d.precision, d.recall, d.f1, d.accuracy], [0.0; 4]);
    }

    #[test]
    fn constant_negative_on_imbalanced() {
        let ds = dataset(100, 10);
        let m = make_splits(&ds, 0.7, 1).unwrap();
        let clfs: Vec<(u64, Box<dyn Classifier>)> =
            vec![(0, Box::new(Constant(0)) as Box<dyn Classifier>)];
        let r = evaluate_classifiers("neg", &clfs, &ds, &m, MaskingVariant::Nomask).unwrap();
        // Test split: 27 negatives, 3 positives.
        let run = &r.runs[0];
        assert_eq!(
            run.confusion,
            ConfusionMatrix {
                tp: 0,
                fp: 0,
                fn_: 3,
                tn: 27
            }
        );
        let p_neg = 27.0 / 30.0;
        let f_neg = 2.0 * p_neg / (p_neg + 1.0);
        assert!((r.mean.precision - p_neg / 2.0).abs() < 1e-12);
        assert!((r.mean.recall - 0.5).abs() < 1e-12);
        assert!((r.mean.f1 - f_neg / 2.0).abs() < 1e-12);
        assert!((r.mean.accuracy - 0.9).abs() < 1e-12);
    }

    #[test]
    fn train_and_evaluate_bow() {
        let ds = dataset(40, 12);
        let m = make_splits(&ds, 0.7, 5).unwrap();
        let config = TrainConfig {
            epochs: 1,
            batch_size: 4,
            optimizer: OptimizerConfig {
                learning_rate: 0.2,
                ..Default::default()
            },
            ..Default::default()
        };
        let art = train(&ds, &m, &config, &BowLogReg).unwrap();
        assert_eq!(art.runs.len(), 5);
        assert!(art.runs.iter().all(|r| r.loss_log.len() == 1));
        assert_eq!(art, train(&ds, &m, &config, &BowLogReg).unwrap());
        let r = evaluate(&art, &ds, &m).unwrap();
        assert!(r.mean.as_array().iter().all(|v| (0.0..=1.0).contains(v)));
        assert_eq!(r.artifact_id.as_deref(), Some(art.artifact_id.as_str()));

        let other = make_splits(&ds, 0.7, 6).unwrap();
        assert!(matches!(
            evaluate(&art, &ds, &other),
            Err(HarnessError::ManifestMismatch { .. })
        ));
    }

    #[test]
    fn mask_variant_needs_masked_text() {
        let mut ds = dataset(20, 6);
        for e in &mut ds {
            e.masked_text = None;
        }
        let m = make_splits(&ds, 0.7, 1).unwrap();
        let err = train(&ds, &m, &TrainConfig::default(), &BowLogReg);
        assert!(matches!(err, Err(HarnessError::Classifier(_))));
    }

    #[test]
    fn kfold_protocol_runs_each_fold() {
        let ds = dataset(30, 10);
        let m = make_kfold(&ds, 5, 2).unwrap();
        let config = TrainConfig {
            epochs: 1,
            optimizer: OptimizerConfig {
                learning_rate: 0.2,
                ..Default::default()
            },
            ..Default::default()
        };
        let art = train(&ds, &m, &config, &BowLogReg).unwrap();
        let r = evaluate(&art, &ds, &m).unwrap();
        assert_eq!(r.runs.iter().map(|r| r.n_test).sum::<usize>(), 30);
    }

    #[test]
    fn wrong_backend_rejected() {
        let ds = dataset(20, 6);
        let m = make_splits(&ds, 0.7, 1).unwrap();
        let c = TrainConfig {
            model_identifier: "roberta-base".into(),
            ..Default::default()
        };
        assert!(matches!(
            train(&ds, &m, &c, &BowLogReg),
            Err(HarnessError::Unsupported { .. })
        ));
    }
}
