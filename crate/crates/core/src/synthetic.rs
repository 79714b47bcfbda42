//! Gaussian-blob data generator.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, weighted::WeightedIndex};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng::{self, purpose};

/// Class-conditional diagonal Gaussians with fixed class priors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticGenerator {
    pub means: Vec<Vec<f64>>,
    pub std_devs: Vec<Vec<f64>>,
    pub priors: Vec<f64>,
    /// Bayes error of the distribution, when known in closed form.
    pub analytic_bayes_error: Option<f64>,
}

impl SyntheticGenerator {
    pub fn new(means: Vec<Vec<f64>>, std_devs: Vec<Vec<f64>>, priors: Vec<f64>) -> Result<Self> {
        let g = Self {
            means,
            std_devs,
            priors,
            analytic_bayes_error: None,
        };
        g.validate()?;
        Ok(g)
    }

    /// Two unit-variance 1-D classes with equal priors. Bayes error is
    /// `Φ(-|μ1 - μ0| / 2)`.
    pub fn two_gaussians_1d(mean0: f64, mean1: f64) -> Self {
        let std_normal = Normal::standard();
        Self {
            means: vec![vec![mean0], vec![mean1]],
            std_devs: vec![vec![1.0], vec![1.0]],
            priors: vec![0.5, 0.5],
            analytic_bayes_error: Some(std_normal.cdf(-(mean1 - mean0).abs() / 2.0)),
        }
    }

    /// `n_classes` unit-variance blobs in `dims` dimensions with equal priors.
    /// Class `c` is centred at `c · separation / √dims` on every axis, so
    /// neighbouring centres are `separation` apart.
    pub fn blobs(n_classes: usize, dims: usize, separation: f64) -> Result<Self> {
        if n_classes == 0 || dims == 0 {
            return Err(Error::InvalidSpec("blobs need at least one class and one dimension".into()));
        }
        let step = separation / (dims as f64).sqrt();
        let means = (0..n_classes).map(|c| vec![c as f64 * step; dims]).collect();
        let analytic = (n_classes == 2).then(|| Normal::standard().cdf(-separation.abs() / 2.0));
        let mut g = Self::new(
            means,
            vec![vec![1.0; dims]; n_classes],
            vec![1.0 / n_classes as f64; n_classes],
        )?;
        g.analytic_bayes_error = analytic;
        Ok(g)
    }

    pub fn n_classes(&self) -> usize {
        self.priors.len()
    }

    pub fn dims(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        let c = self.priors.len();
        if c == 0 {
            return Err(Error::InvalidSpec("generator needs at least one class".into()));
        }
        if self.means.len() != c || self.std_devs.len() != c {
            return Err(Error::InvalidSpec(format!(
                "{c} priors but {} mean vectors and {} std-dev vectors",
                self.means.len(),
                self.std_devs.len()
            )));
        }
        let d = self.dims();
        if d == 0 || self.means.iter().chain(&self.std_devs).any(|v| v.len() != d) {
            return Err(Error::InvalidSpec("all class vectors must share one positive dimension".into()));
        }
        if self.std_devs.iter().flatten().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidSpec("standard deviations must be positive and finite".into()));
        }
        if self.means.iter().flatten().any(|m| !m.is_finite()) {
            return Err(Error::InvalidSpec("means must be finite".into()));
        }
        if self.priors.iter().any(|&p| p.is_nan() || p < 0.0) {
            return Err(Error::InvalidSpec("priors must be non-negative".into()));
        }
        let total: f64 = self.priors.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidSpec(format!("priors sum to {total}, not 1")));
        }
        Ok(())
    }

    /// Largest-remainder allocation of `n` samples to classes; remainder
    /// ties go to the lower class index.
    pub fn class_allocation(&self, n: usize) -> Vec<usize> {
        let quotas: Vec<f64> = self.priors.iter().map(|p| p * n as f64).collect();
        let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
        let assigned: usize = counts.iter().sum();
        let mut order: Vec<usize> = (0..counts.len()).collect();
        order.sort_by(|&a, &b| {
            let ra = quotas[a] - quotas[a].floor();
            let rb = quotas[b] - quotas[b].floor();
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        for &c in order.iter().cycle().take(n.saturating_sub(assigned)) {
            counts[c] += 1;
        }
        counts
    }

    /// Draws `n` samples with exact class counts from
    /// [`class_allocation`](Self::class_allocation), in shuffled row order.
    pub fn generate(&self, n: usize, seed: u64) -> Result<Dataset> {
        self.validate()?;
        let mut rng = rng::stream(seed, purpose::DATA);
        let counts = self.class_allocation(n);
        let mut labels: Vec<usize> = counts
            .iter()
            .enumerate()
            .flat_map(|(c, &m)| std::iter::repeat_n(c, m))
            .collect();
        labels.shuffle(&mut rng);
        self.fill_features(labels, &mut rng)
    }

    /// Draws `n` i.i.d. samples: each label is an independent draw from the
    /// priors, so class counts are multinomial rather than fixed.
    pub fn generate_iid(&self, n: usize, seed: u64) -> Result<Dataset> {
        self.validate()?;
        let mut rng = rng::stream(seed, purpose::DATA);
        let classes = WeightedIndex::new(&self.priors)
            .map_err(|e| Error::InvalidSpec(format!("priors: {e}")))?;
        let labels = (0..n).map(|_| classes.sample(&mut rng)).collect();
        self.fill_features(labels, &mut rng)
    }

    fn fill_features(&self, labels: Vec<usize>, rng: &mut SplitMix64) -> Result<Dataset> {
        let n = labels.len();
        let d = self.dims();
        let mut features = Array2::<f64>::zeros((n, d));
        for (mut row, &c) in features.rows_mut().into_iter().zip(&labels) {
            for j in 0..d {
                let z: f64 = rng.sample(StandardNormal);
                row[j] = self.means[c][j] + self.std_devs[c][j] * z;
            }
        }
        Dataset::new(features, labels, self.n_classes())
    }
}
