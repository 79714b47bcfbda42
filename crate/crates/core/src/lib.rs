//! Irredundant (IkF) and standard (kF) k-fold cross-validation.
//!
//! * [`partition`] builds seeded, optionally stratified folds, subfolds and
//!   train/test index pairs for both schemes.
//! * [`learners`] and [`metrics`] supply reference classifiers and scores.
//! * [`harness`] runs a scheme end to end and compares IkF against kF.
//! * [`stats`] estimates bias, fold covariances and MSE by Monte Carlo.
//! * [`io`] and [`synthetic`] load CSV files and draw Gaussian-blob data.

pub mod dataset;
pub mod error;
pub mod harness;
pub mod io;
pub mod learners;
pub mod metrics;
pub mod partition;
pub mod rng;
pub mod stats;
pub mod synthetic;

pub use dataset::Dataset;
pub use error::{Error, Result};
pub use learners::{Classifier, Learner, ModelSpec};
pub use metrics::{Metric, MetricValue};
pub use partition::{AssignmentStrategy, FeasibilityVerdict, PartitionPlan, Scheme, SplitPair};
