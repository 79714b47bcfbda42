//! End-to-end evaluation: split, fit, predict, score and time each fold.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::learners::Learner;
use crate::metrics::{confusion, ConfusionMatrix, Metric, MetricValue};
use crate::partition::{make_splits, AssignmentStrategy, Scheme, SplitPair};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOptions {
    pub scheme: Scheme,
    pub k: usize,
    pub seed: u64,
    pub stratified: bool,
    pub strategy: AssignmentStrategy,
    /// Evaluate folds concurrently. Results do not depend on this flag.
    pub parallel: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            scheme: Scheme::Ikf,
            k: 5,
            seed: rng::DEFAULT_SEED,
            stratified: false,
            strategy: AssignmentStrategy::default(),
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub iteration: usize,
    pub metrics: Vec<MetricValue>,
    pub confusion: ConfusionMatrix,
    pub train_size: usize,
    pub test_size: usize,
    /// Seconds, monotonic clock.
    pub fit_time: f64,
    pub predict_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub scheme: Scheme,
    pub k: usize,
    pub seed: u64,
    pub stratified: bool,
    pub strategy: AssignmentStrategy,
    pub folds: Vec<FoldReport>,
    /// Unweighted mean of the fold values, per metric.
    pub mean_metrics: Vec<MetricValue>,
    /// Sum of fit and predict times over folds.
    pub total_time: f64,
}

impl EvaluationReport {
    pub fn mean(&self, metric: Metric) -> Option<f64> {
        find(&self.mean_metrics, metric)
    }

    /// Values of `metric` per fold, in fold order.
    pub fn fold_values(&self, metric: Metric) -> Option<Vec<f64>> {
        self.folds.iter().map(|f| find(&f.metrics, metric)).collect()
    }

    /// Confusion matrix summed over all folds (every sample scored once).
    pub fn pooled_confusion(&self) -> Option<ConfusionMatrix> {
        let first = self.folds.first()?;
        let c = first.confusion.n_classes();
        let mut truth = Vec::new();
        let mut predicted = Vec::new();
        for fold in &self.folds {
            for t in 0..c {
                for p in 0..c {
                    let count = fold.confusion.get(t, p) as usize;
                    truth.extend(std::iter::repeat_n(t, count));
                    predicted.extend(std::iter::repeat_n(p, count));
                }
            }
        }
        confusion(&truth, &predicted, c).ok()
    }
}

fn find(values: &[MetricValue], metric: Metric) -> Option<f64> {
    values.iter().find(|m| m.name == metric).map(|m| m.value)
}

fn evaluate_split(
    dataset: &Dataset,
    split: &SplitPair,
    learner: &dyn Learner,
    metrics: &[Metric],
) -> Result<FoldReport> {
    let (train_x, train_y) = dataset.subset(&split.train_indices);
    let (test_x, test_y) = dataset.subset(&split.test_indices);

    let start = Instant::now();
    let model = learner.fit(train_x.view(), &train_y)?;
    let fit_time = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let predicted = model.predict(test_x.view())?;
    let predict_time = start.elapsed().as_secs_f64();

    let cm = confusion(&test_y, &predicted, dataset.n_classes())?;
    let values = metrics
        .iter()
        .map(|m| m.evaluate(&cm))
        .collect::<Result<Vec<_>>>()?;
    Ok(FoldReport {
        iteration: split.iteration,
        metrics: values,
        confusion: cm,
        train_size: split.train_indices.len(),
        test_size: split.test_indices.len(),
        fit_time,
        predict_time,
    })
}

/// Run one cross-validation scheme end to end.
pub fn run_scheme(
    dataset: &Dataset,
    options: &RunOptions,
    learner: &dyn Learner,
    metrics: &[Metric],
) -> Result<EvaluationReport> {
    if metrics.is_empty() {
        return Err(Error::InvalidSpec("at least one metric is required".into()));
    }
    let splits = make_splits(
        dataset.n_samples(),
        Some(dataset.labels()),
        options.k,
        options.seed,
        options.stratified,
        options.scheme,
        options.strategy,
    )?;

    let folds: Vec<FoldReport> = if options.parallel {
        splits
            .par_iter()
            .map(|s| evaluate_split(dataset, s, learner, metrics))
            .collect::<Result<_>>()?
    } else {
        splits
            .iter()
            .map(|s| evaluate_split(dataset, s, learner, metrics))
            .collect::<Result<_>>()?
    };

    let k = folds.len() as f64;
    let mean_metrics = metrics
        .iter()
        .enumerate()
        .map(|(m, &name)| MetricValue {
            name,
            value: folds.iter().map(|f| f.metrics[m].value).sum::<f64>() / k,
        })
        .collect();
    let total_time = folds.iter().map(|f| f.fit_time + f.predict_time).sum();

    Ok(EvaluationReport {
        scheme: options.scheme,
        k: options.k,
        seed: options.seed,
        stratified: options.stratified,
        strategy: options.strategy,
        folds,
        mean_metrics,
        total_time,
    })
}

/// One scheme's results across repeats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSummary {
    pub scheme: Scheme,
    /// Per-metric mean over repeats of each run's mean.
    pub mean_metrics: Vec<MetricValue>,
    /// Summed over repeats.
    pub total_time: f64,
    pub runs: Vec<EvaluationReport>,
}

impl SchemeSummary {
    fn from_runs(scheme: Scheme, metrics: &[Metric], runs: Vec<EvaluationReport>) -> Self {
        let r = runs.len() as f64;
        let mean_metrics = metrics
            .iter()
            .map(|&name| MetricValue {
                name,
                value: runs.iter().filter_map(|run| run.mean(name)).sum::<f64>() / r,
            })
            .collect();
        Self {
            scheme,
            mean_metrics,
            total_time: runs.iter().map(|run| run.total_time).sum(),
            runs,
        }
    }

    pub fn mean(&self, metric: Metric) -> Option<f64> {
        find(&self.mean_metrics, metric)
    }
}

/// `kF / IkF` ratio of one metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricRatio {
    pub name: Metric,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub k: usize,
    pub seed: u64,
    pub repeats: usize,
    pub stratified: bool,
    pub ikf: SchemeSummary,
    pub kf: SchemeSummary,
    /// `kF / IkF` per metric; `None` when the IkF value is 0.
    pub ratios: Vec<MetricRatio>,
    /// `Time_kF / Time_IkF`.
    pub speed_up: Option<f64>,
}

impl ComparisonReport {
    pub fn ratio(&self, metric: Metric) -> Option<f64> {
        self.ratios.iter().find(|r| r.name == metric).and_then(|r| r.value)
    }

    /// Accuracy ratio (RAcc).
    pub fn racc(&self) -> Option<f64> {
        self.ratio(Metric::Accuracy)
    }

    /// F-score ratio (RFsc), whichever F-score variant was computed.
    pub fn rfsc(&self) -> Option<f64> {
        self.ratios
            .iter()
            .find(|r| r.name.is_f_score())
            .and_then(|r| r.value)
    }
}

fn safe_ratio(num: f64, den: f64) -> Option<f64> {
    (den > 0.0).then(|| num / den)
}

/// Run IkF and kF `repeats` times each (repeat `r` uses seed `seed ^ r`)
/// and form the kF/IkF ratios from averaged metrics and summed times.
pub fn compare(
    dataset: &Dataset,
    options: &RunOptions,
    learner: &dyn Learner,
    metrics: &[Metric],
    repeats: usize,
) -> Result<ComparisonReport> {
    if repeats == 0 {
        return Err(Error::InvalidSpec("repeats must be at least 1".into()));
    }
    let mut ikf_runs = Vec::with_capacity(repeats);
    let mut kf_runs = Vec::with_capacity(repeats);
    for r in 0..repeats {
        let seed = rng::repeat_seed(options.seed, r as u64);
        for (scheme, runs) in [(Scheme::Ikf, &mut ikf_runs), (Scheme::Kf, &mut kf_runs)] {
            let opts = RunOptions {
                scheme,
                seed,
                ..*options
            };
            runs.push(run_scheme(dataset, &opts, learner, metrics)?);
        }
    }
    let ikf = SchemeSummary::from_runs(Scheme::Ikf, metrics, ikf_runs);
    let kf = SchemeSummary::from_runs(Scheme::Kf, metrics, kf_runs);
    let ratios = metrics
        .iter()
        .map(|&name| MetricRatio {
            name,
            value: match (kf.mean(name), ikf.mean(name)) {
                (Some(a), Some(b)) => safe_ratio(a, b),
                _ => None,
            },
        })
        .collect();
    let speed_up = safe_ratio(kf.total_time, ikf.total_time);
    Ok(ComparisonReport {
        k: options.k,
        seed: options.seed,
        repeats,
        stratified: options.stratified,
        ikf,
        kf,
        ratios,
        speed_up,
    })
}

/// Theoretical kF/IkF cost ratio `(k-1)^e` for a learner whose cost grows
/// as `n^e` in the training-set size.
pub fn predicted_cost_ratio(k: usize, cost_exponent: f64) -> f64 {
    assert!(k >= 2, "k must be at least 2");
    ((k - 1) as f64).powf(cost_exponent)
}
