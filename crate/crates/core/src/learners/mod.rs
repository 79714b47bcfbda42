//! Reference classifiers behind a model-agnostic interface.
//!
//! The harness only sees [`Learner`] and [`Classifier`]; any user model that
//! implements them can be cross-validated.

mod knn;
mod naive_bayes;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::Result;

pub use knn::KnnModel;
pub use naive_bayes::{GaussianNbModel, VAR_SMOOTHING};

/// A fitted model.
pub trait Classifier: Send + Sync {
    fn predict(&self, features: ArrayView2<'_, f64>) -> Result<Vec<usize>>;
}

/// Something that can be trained into a [`Classifier`].
pub trait Learner: Send + Sync {
    fn fit(&self, features: ArrayView2<'_, f64>, labels: &[usize]) -> Result<Box<dyn Classifier>>;
}

/// The built-in learners, serializable so reports can record what ran.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Knn { neighbors: usize },
    GaussianNb,
    /// Ignores its input and always predicts `class`.
    Constant { class: usize },
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec::Knn { neighbors: 5 }
    }
}

impl Learner for ModelSpec {
    fn fit(&self, features: ArrayView2<'_, f64>, labels: &[usize]) -> Result<Box<dyn Classifier>> {
        Ok(match *self {
            ModelSpec::Knn { neighbors } => Box::new(KnnModel::fit(features, labels, neighbors)?),
            ModelSpec::GaussianNb => Box::new(GaussianNbModel::fit(features, labels)?),
            ModelSpec::Constant { class } => Box::new(ConstantModel { class }),
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConstantModel {
    pub class: usize,
}

impl Classifier for ConstantModel {
    fn predict(&self, features: ArrayView2<'_, f64>) -> Result<Vec<usize>> {
        Ok(vec![self.class; features.nrows()])
    }
}
