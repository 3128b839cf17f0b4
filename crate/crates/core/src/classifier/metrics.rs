use serde::{Deserialize, Serialize};

/// Counts with class 1 as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// (true, predicted, actual) counts for class `c`.
    fn class_counts(&self, c: u8) -> (usize, usize, usize) {
        if c == 1 {
            (self.tp, self.tp + self.fp, self.tp + self.fn_)
        } else {
            (self.tn, self.tn + self.fn_, self.tn + self.fp)
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MacroMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
}

impl MacroMetrics {
    pub fn as_array(&self) -> [f64; 4] {
        [self.precision, self.recall, self.f1, self.accuracy]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self {
            precision: a[0],
            recall: a[1],
            f1: a[2],
            accuracy: a[3],
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsOutcome {
    pub metrics: MacroMetrics,
    pub confusion: ConfusionMatrix,
    /// Index 0 is the negative class, 1 the positive class.
    pub per_class: [ClassMetrics; 2],
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("{predictions} predictions for {golds} gold labels")]
    LengthMismatch { predictions: usize, golds: usize },
    #[error("no labels to score")]
    Empty,
    #[error("label {0} is not binary")]
    NotBinary(u8),
}

pub fn confusion_matrix(predictions: &[u8], golds: &[u8]) -> Result<ConfusionMatrix, MetricsError> {
    if predictions.len() != golds.len() {
        return Err(MetricsError::LengthMismatch {
            predictions: predictions.len(),
            golds: golds.len(),
        });
    }
    let mut m = ConfusionMatrix::default();
    for (&p, &g) in predictions.iter().zip(golds) {
        if let Some(bad) = [p, g].into_iter().find(|v| *v > 1) {
            return Err(MetricsError::NotBinary(bad));
        }
        match (p, g) {
            (1, 1) => m.tp += 1,
            (1, 0) => m.fp += 1,
            (0, 1) => m.fn_ += 1,
            _ => m.tn += 1,
        }
    }
    Ok(m)
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Macro metrics from confusion counts. Undefined ratios (zero
/// denominators) count as 0 and are reported in the warnings.
pub fn metrics_from_confusion(m: &ConfusionMatrix) -> Result<MetricsOutcome, MetricsError> {
    if m.total() == 0 {
        return Err(MetricsError::Empty);
    }
    let mut warnings = Vec::new();
    let mut per_class = [ClassMetrics::default(); 2];
    for c in 0..=1u8 {
        let (hit, predicted, actual) = m.class_counts(c);
        if predicted == 0 && actual == 0 {
            warnings.push(format!(
                "class {c} absent from predictions and golds; F1 set to 0"
            ));
            continue;
        }
        let precision = ratio(hit, predicted).unwrap_or_else(|| {
            warnings.push(format!("class {c} never predicted; precision set to 0"));
            0.0
        });
        let recall = ratio(hit, actual).unwrap_or_else(|| {
            warnings.push(format!("class {c} absent from golds; recall set to 0"));
            0.0
        });
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        per_class[c as usize] = ClassMetrics {
            precision,
            recall,
            f1,
            support: actual,
        };
    }
    let mean = |f: fn(&ClassMetrics) -> f64| (f(&per_class[0]) + f(&per_class[1])) / 2.0;
    Ok(MetricsOutcome {
        metrics: MacroMetrics {
            precision: mean(|c| c.precision),
            recall: mean(|c| c.recall),
            f1: mean(|c| c.f1),
            accuracy: (m.tp + m.tn) as f64 / m.total() as f64,
        },
        confusion: *m,
        per_class,
        warnings,
    })
}

/// Unweighted two-class averages of precision, recall and F1, plus accuracy.
pub fn compute_macro_metrics(
    predictions: &[u8],
    golds: &[u8],
) -> Result<MetricsOutcome, MetricsError> {
    metrics_from_confusion(&confusion_matrix(predictions, golds)?)
}

/// How spread across runs is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DispersionKind {
    /// Mean squared deviation from the mean (divides by n).
    PopulationVariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dispersion {
    pub kind: DispersionKind,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
}

/// Arithmetic mean and population variance of per-run metrics. A metric
/// that is identical across runs gets exactly that mean and zero variance,
/// free of summation rounding.
pub fn aggregate(runs: &[MacroMetrics]) -> (MacroMetrics, Dispersion) {
    let mut mean = [0.0; 4];
    let mut var = [0.0; 4];
    for k in 0..4 {
        let values: Vec<f64> = runs.iter().map(|r| r.as_array()[k]).collect();
        if values.is_empty() {
            continue;
        }
        if values.iter().all(|v| *v == values[0]) {
            mean[k] = values[0];
            continue;
        }
        let n = values.len() as f64;
        let m = values.iter().sum::<f64>() / n;
        mean[k] = m;
        var[k] = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
    }
    (
        MacroMetrics::from_array(mean),
        Dispersion {
            kind: DispersionKind::PopulationVariance,
            precision: var[0],
            recall: var[1],
            f1: var[2],
            accuracy: var[3],
        },
    )
}
