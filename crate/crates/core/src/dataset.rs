use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Labelled samples: an `n × d` feature matrix and class indices in `0..c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Vec<usize>,
    class_counts: Vec<usize>,
    class_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset with `n_classes` classes; class names default to the indices.
    pub fn new(features: Array2<f64>, labels: Vec<usize>, n_classes: usize) -> Result<Self> {
        let names = (0..n_classes).map(|c| c.to_string()).collect();
        Self::with_class_names(features, labels, names)
    }

    pub fn with_class_names(
        features: Array2<f64>,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let n_classes = class_names.len();
        if n_classes == 0 {
            return Err(Error::InvalidSpec("a dataset needs at least one class".into()));
        }
        if labels.len() != features.nrows() {
            return Err(Error::LengthMismatch {
                left: features.nrows(),
                right: labels.len(),
            });
        }
        let mut class_counts = vec![0; n_classes];
        for &label in &labels {
            if label >= n_classes {
                return Err(Error::LabelOutOfRange {
                    label,
                    classes: n_classes,
                });
            }
            class_counts[label] += 1;
        }
        Ok(Self {
            features,
            labels,
            class_counts,
            class_names,
        })
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_counts(&self) -> &[usize] {
        &self.class_counts
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.class_counts.len()
    }

    /// Size of the smallest class (`c_min`).
    pub fn min_class_count(&self) -> usize {
        self.class_counts.iter().copied().min().unwrap_or(0)
    }

    /// Rows at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> (Array2<f64>, Vec<usize>) {
        let x = self.features.select(Axis(0), indices);
        let y = indices.iter().map(|&i| self.labels[i]).collect();
        (x, y)
    }

    /// Z-score every feature column over the whole dataset. Constant columns
    /// are only centred.
    pub fn standardized(&self) -> Self {
        let mut features = self.features.clone();
        let n = features.nrows().max(1) as f64;
        for mut col in features.columns_mut() {
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
            col.mapv_inplace(|v| (v - mean) / sd);
        }
        Self {
            features,
            ..self.clone()
        }
    }
}
