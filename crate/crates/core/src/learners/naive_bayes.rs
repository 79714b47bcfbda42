use ndarray::{Array2, ArrayView2, Axis};

use super::Classifier;
use crate::error::{Error, Result};

/// Variances are smoothed by this fraction of the largest feature variance.
pub const VAR_SMOOTHING: f64 = 1e-9;

/// Gaussian naive Bayes with per-class diagonal Gaussians.
#[derive(Debug, Clone)]
pub struct GaussianNbModel {
    classes: Vec<usize>,
    priors: Vec<f64>,
    means: Array2<f64>,
    variances: Array2<f64>,
    epsilon: f64,
}

impl GaussianNbModel {
    /// Fits one Gaussian per class that occurs in `labels`.
    pub fn fit(features: ArrayView2<'_, f64>, labels: &[usize]) -> Result<Self> {
        let n_classes = labels.iter().max().map_or(0, |m| m + 1);
        Self::fit_impl(features, labels, n_classes, false)
    }

    /// Like [`fit`](Self::fit) but requires every class in `0..n_classes` to
    /// have at least one sample.
    pub fn fit_for_classes(
        features: ArrayView2<'_, f64>,
        labels: &[usize],
        n_classes: usize,
    ) -> Result<Self> {
        Self::fit_impl(features, labels, n_classes, true)
    }

    fn fit_impl(
        features: ArrayView2<'_, f64>,
        labels: &[usize],
        n_classes: usize,
        require_all: bool,
    ) -> Result<Self> {
        let n = labels.len();
        if n == 0 || features.nrows() == 0 {
            return Err(Error::EmptyTrainingSet);
        }
        if n != features.nrows() {
            return Err(Error::LengthMismatch {
                left: features.nrows(),
                right: n,
            });
        }
        let d = features.ncols();
        let mut counts = vec![0usize; n_classes];
        for &y in labels {
            if y >= n_classes {
                return Err(Error::LabelOutOfRange {
                    label: y,
                    classes: n_classes,
                });
            }
            counts[y] += 1;
        }
        if require_all {
            if let Some(c) = counts.iter().position(|&c| c == 0) {
                return Err(Error::DegenerateClass(c));
            }
        }
        let classes: Vec<usize> = (0..n_classes).filter(|&c| counts[c] > 0).collect();
        let slot = {
            let mut slot = vec![usize::MAX; n_classes];
            for (s, &c) in classes.iter().enumerate() {
                slot[c] = s;
            }
            slot
        };

        // Sums in sample-index order so results do not depend on anything else.
        let mut means = Array2::<f64>::zeros((classes.len(), d));
        for (row, &y) in features.rows().into_iter().zip(labels) {
            let mut m = means.row_mut(slot[y]);
            m += &row;
        }
        for (s, &c) in classes.iter().enumerate() {
            means.row_mut(s).mapv_inplace(|v| v / counts[c] as f64);
        }
        let mut variances = Array2::<f64>::zeros((classes.len(), d));
        for (row, &y) in features.rows().into_iter().zip(labels) {
            let s = slot[y];
            for j in 0..d {
                let diff = row[j] - means[[s, j]];
                variances[[s, j]] += diff * diff;
            }
        }
        for (s, &c) in classes.iter().enumerate() {
            variances.row_mut(s).mapv_inplace(|v| v / counts[c] as f64);
        }

        let global_var = features
            .var_axis(Axis(0), 0.0)
            .iter()
            .copied()
            .fold(0.0, f64::max);
        let epsilon = VAR_SMOOTHING * if global_var > 0.0 { global_var } else { 1.0 };
        variances.mapv_inplace(|v| v + epsilon);

        let priors = classes.iter().map(|&c| counts[c] as f64 / n as f64).collect();
        Ok(Self {
            classes,
            priors,
            means,
            variances,
            epsilon,
        })
    }

    pub fn classes(&self) -> &[usize] {
        &self.classes
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn means(&self) -> &Array2<f64> {
        &self.means
    }

    pub fn variances(&self) -> &Array2<f64> {
        &self.variances
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Joint log-likelihood `log P(c) + Σ_j log N(x_j; μ_cj, σ²_cj)` per class.
    pub fn joint_log_likelihood(&self, x: &[f64]) -> Vec<f64> {
        let ln_2pi = (2.0 * std::f64::consts::PI).ln();
        (0..self.classes.len())
            .map(|s| {
                let ll: f64 = x
                    .iter()
                    .enumerate()
                    .map(|(j, &v)| {
                        let var = self.variances[[s, j]];
                        let diff = v - self.means[[s, j]];
                        -0.5 * (ln_2pi + var.ln()) - diff * diff / (2.0 * var)
                    })
                    .sum();
                self.priors[s].ln() + ll
            })
            .collect()
    }
}

impl Classifier for GaussianNbModel {
    fn predict(&self, query: ArrayView2<'_, f64>) -> Result<Vec<usize>> {
        let d = self.means.ncols();
        if query.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: query.ncols(),
            });
        }
        let mut row_buf = vec![0.0; d];
        Ok(query
            .rows()
            .into_iter()
            .map(|row| {
                row_buf.iter_mut().zip(row).for_each(|(b, &v)| *b = v);
                let scores = self.joint_log_likelihood(&row_buf);
                let mut best = 0;
                for (s, &score) in scores.iter().enumerate() {
                    if score > scores[best] {
                        best = s;
                    }
                }
                self.classes[best]
            })
            .collect())
    }
}
