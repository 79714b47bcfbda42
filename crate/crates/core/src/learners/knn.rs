use ndarray::{Array2, ArrayView2};

use super::Classifier;
use crate::error::{Error, Result};

/// Brute-force k-nearest-neighbours with Euclidean distance.
///
/// Distance ties go to the lower training index and vote ties to the
/// smaller class index, so predictions are fully deterministic.
#[derive(Debug, Clone)]
pub struct KnnModel {
    neighbors: usize,
    features: Array2<f64>,
    labels: Vec<usize>,
    n_classes: usize,
}

impl KnnModel {
    pub fn fit(features: ArrayView2<'_, f64>, labels: &[usize], neighbors: usize) -> Result<Self> {
        if neighbors == 0 {
            return Err(Error::InvalidSpec("k-NN needs at least one neighbour".into()));
        }
        if labels.is_empty() || features.nrows() == 0 {
            return Err(Error::EmptyTrainingSet);
        }
        if labels.len() != features.nrows() {
            return Err(Error::LengthMismatch {
                left: features.nrows(),
                right: labels.len(),
            });
        }
        Ok(Self {
            neighbors,
            features: features.as_standard_layout().into_owned(),
            labels: labels.to_vec(),
            n_classes: labels.iter().max().map_or(0, |m| m + 1),
        })
    }

    /// `min(neighbors, training size)`.
    pub fn effective_neighbors(&self) -> usize {
        self.neighbors.min(self.labels.len())
    }

    fn predict_one(&self, query: &[f64], best: &mut Vec<(f64, usize)>, votes: &mut [usize]) -> usize {
        let kk = self.effective_neighbors();
        let d = query.len();
        let train = self.features.as_slice().expect("standard layout");
        best.clear();
        for (idx, row) in train.chunks_exact(d.max(1)).enumerate().take(self.labels.len()) {
            let dist: f64 = row.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum();
            if best.len() == kk && dist >= best[kk - 1].0 {
                continue;
            }
            // sorted by (distance, index): equal distances insert after earlier indices
            let pos = best.partition_point(|&(bd, _)| bd <= dist);
            if best.len() == kk {
                best.pop();
            }
            best.insert(pos, (dist, idx));
        }
        votes.iter_mut().for_each(|v| *v = 0);
        for &(_, idx) in best.iter() {
            votes[self.labels[idx]] += 1;
        }
        let mut winner = 0;
        for (class, &count) in votes.iter().enumerate() {
            if count > votes[winner] {
                winner = class;
            }
        }
        winner
    }
}

impl Classifier for KnnModel {
    fn predict(&self, query: ArrayView2<'_, f64>) -> Result<Vec<usize>> {
        let d = self.features.ncols();
        if query.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: query.ncols(),
            });
        }
        let query = query.as_standard_layout();
        let mut best = Vec::with_capacity(self.effective_neighbors() + 1);
        let mut votes = vec![0; self.n_classes];
        Ok(query
            .rows()
            .into_iter()
            .map(|row| {
                let row = row.to_slice().expect("standard layout");
                self.predict_one(row, &mut best, &mut votes)
            })
            .collect())
    }
}
