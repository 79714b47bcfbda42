//! Classification metrics computed from a confusion matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `counts[t][p]` = number of samples of true class `t` predicted as `p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    counts: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Accuracy,
    FScoreMacro,
    FScoreBinary,
}

impl Metric {
    pub fn short_name(self) -> &'static str {
        match self {
            Metric::Accuracy => "Acc",
            Metric::FScoreMacro | Metric::FScoreBinary => "Fsc",
        }
    }

    pub fn is_f_score(self) -> bool {
        matches!(self, Metric::FScoreMacro | Metric::FScoreBinary)
    }

    pub fn evaluate(self, cm: &ConfusionMatrix) -> Result<MetricValue> {
        match self {
            Metric::Accuracy => accuracy(cm),
            Metric::FScoreMacro => f_score(cm, Averaging::Macro),
            Metric::FScoreBinary => f_score(cm, Averaging::BinaryPositiveClass),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub name: Metric,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Averaging {
    /// Unweighted mean of per-class F1 over the classes that occur.
    Macro,
    /// F1 of class 1; binary problems only.
    BinaryPositiveClass,
}

impl ConfusionMatrix {
    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth][predicted]
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n_classes()).map(|c| self.counts[c][c]).sum()
    }

    /// Per-class F1; 0 when precision + recall is 0.
    fn class_f1(&self, class: usize) -> f64 {
        let tp = self.counts[class][class] as f64;
        let predicted: u64 = self.counts.iter().map(|row| row[class]).sum();
        let actual: u64 = self.counts[class].iter().sum();
        // 2PR/(P+R) reduces to 2tp / (predicted + actual).
        if tp == 0.0 {
            0.0
        } else {
            2.0 * tp / (predicted + actual) as f64
        }
    }
}

pub fn confusion(truth: &[usize], predicted: &[usize], n_classes: usize) -> Result<ConfusionMatrix> {
    if truth.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            left: truth.len(),
            right: predicted.len(),
        });
    }
    let mut counts = vec![vec![0u64; n_classes]; n_classes];
    for (&t, &p) in truth.iter().zip(predicted) {
        for label in [t, p] {
            if label >= n_classes {
                return Err(Error::LabelOutOfRange {
                    label,
                    classes: n_classes,
                });
            }
        }
        counts[t][p] += 1;
    }
    Ok(ConfusionMatrix { counts })
}

pub fn accuracy(cm: &ConfusionMatrix) -> Result<MetricValue> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::EmptyTestSet);
    }
    Ok(MetricValue {
        name: Metric::Accuracy,
        value: cm.trace() as f64 / total as f64,
    })
}

pub fn f_score(cm: &ConfusionMatrix, averaging: Averaging) -> Result<MetricValue> {
    if cm.total() == 0 {
        return Err(Error::EmptyTestSet);
    }
    Ok(match averaging {
        Averaging::Macro => {
            // Classes absent from both truth and predictions are skipped.
            let present: Vec<usize> = (0..cm.n_classes())
                .filter(|&c| cm.counts[c].iter().sum::<u64>() + cm.counts.iter().map(|r| r[c]).sum::<u64>() > 0)
                .collect();
            let sum: f64 = present.iter().map(|&class| cm.class_f1(class)).sum();
            MetricValue {
                name: Metric::FScoreMacro,
                value: sum / present.len() as f64,
            }
        }
        Averaging::BinaryPositiveClass => {
            if cm.n_classes() != 2 {
                return Err(Error::NotBinary(cm.n_classes()));
            }
            MetricValue {
                name: Metric::FScoreBinary,
                value: cm.class_f1(1),
            }
        }
    })
}
