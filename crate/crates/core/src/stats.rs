//! Monte-Carlo estimates of cross-validation bias, fold variances and
//! inter-fold covariances.
//!
//! Fold estimates are risks: `θ̂_i = 1 - δ_i` for the configured metric
//! `δ` (the misclassification rate when `δ` is accuracy). All moments use
//! population (`1/R`) normalization, so for every report
//!
//! ```text
//! Var(θ̂) = (1/k²) · Σ_ij C_ij        MSE = Bias² + Var(θ̂)
//! ```
//!
//! hold exactly up to floating-point rounding. Sample-form (`1/(R-1)`)
//! values are reported alongside for inference.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::harness::{run_scheme, RunOptions};
use crate::learners::{Learner, ModelSpec};
use crate::metrics::{accuracy, confusion, Metric};
use crate::partition::{AssignmentStrategy, Scheme};
use crate::rng::{self, purpose};
use crate::synthetic::SyntheticGenerator;

/// Smallest holdout accepted by [`estimate_reference_risk`].
pub const MIN_HOLDOUT: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataSource {
    /// Re-partition the same samples every repetition.
    FixedDataset { dataset: Dataset },
    /// Draw `n` fresh i.i.d. samples every repetition.
    SyntheticGenerator { generator: SyntheticGenerator, n: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub repetitions: usize,
    pub scheme: Scheme,
    pub k: usize,
    pub model: ModelSpec,
    pub metric: Metric,
    pub data_source: DataSource,
    /// True risk `θ` the estimator targets, if known.
    pub reference_risk: Option<f64>,
    pub seed: u64,
    pub stratified: bool,
    pub strategy: AssignmentStrategy,
    /// Run repetitions concurrently. Results do not depend on this flag.
    pub parallel: bool,
}

impl MonteCarloConfig {
    pub fn new(scheme: Scheme, k: usize, model: ModelSpec, data_source: DataSource) -> Self {
        Self {
            repetitions: 200,
            scheme,
            k,
            model,
            metric: Metric::Accuracy,
            data_source,
            reference_risk: None,
            seed: rng::DEFAULT_SEED,
            stratified: false,
            strategy: AssignmentStrategy::default(),
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MseDecomposition {
    pub bias: f64,
    pub bias_squared: f64,
    pub variance: f64,
    pub mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub scheme: Scheme,
    pub k: usize,
    pub repetitions: usize,
    /// `R × k` fold risks `θ̂_i`.
    pub fold_estimates: Vec<Vec<f64>>,
    /// Per-repetition `θ̂ = mean_i θ̂_i`.
    pub run_estimates: Vec<f64>,
    pub fold_means: Vec<f64>,
    /// `Var(θ̂_i)`, population form; equals the covariance diagonal.
    pub fold_variance_vector: Vec<f64>,
    /// `Cov(θ̂_i, θ̂_j)`, population form.
    pub covariance_matrix: Vec<Vec<f64>>,
    pub covariance_matrix_sample: Vec<Vec<f64>>,
    pub estimator_mean: f64,
    /// `Var(θ̂)`, population form, computed directly from `run_estimates`.
    pub estimator_variance: f64,
    pub estimator_variance_sample: f64,
    /// `(1/k²) Σ_i Var(θ̂_i)`: the variance if folds were independent.
    pub variance_independent: f64,
    /// Mean of the off-diagonal covariances.
    pub mean_offdiag_covariance: f64,
    /// Monte-Carlo standard error of `mean_offdiag_covariance`.
    pub mean_offdiag_covariance_se: f64,
    pub reference_risk: Option<f64>,
    pub bias: Option<f64>,
    pub mse: Option<MseDecomposition>,
}

/// Mean taken relative to the first value, so a constant column has exactly
/// its own value as mean and exactly zero deviations.
fn shifted_mean(values: &[f64]) -> f64 {
    let origin = values[0];
    origin + values.iter().map(|v| v - origin).sum::<f64>() / values.len() as f64
}

impl MonteCarloReport {
    /// Computes every moment from an `R × k` matrix of fold estimates.
    pub fn from_fold_estimates(
        scheme: Scheme,
        fold_estimates: Vec<Vec<f64>>,
        reference_risk: Option<f64>,
    ) -> Result<Self> {
        let r = fold_estimates.len();
        if r < 2 {
            return Err(Error::InsufficientRepetitions(r));
        }
        let k = fold_estimates[0].len();
        if k == 0 || fold_estimates.iter().any(|row| row.len() != k) {
            return Err(Error::InvalidSpec("fold estimate rows must share one positive length".into()));
        }
        let rf = r as f64;
        let kf = k as f64;

        let run_estimates: Vec<f64> = fold_estimates
            .iter()
            .map(|row| row.iter().sum::<f64>() / kf)
            .collect();
        let fold_means: Vec<f64> = (0..k)
            .map(|i| shifted_mean(&fold_estimates.iter().map(|row| row[i]).collect::<Vec<_>>()))
            .collect();
        let centred: Vec<Vec<f64>> = fold_estimates
            .iter()
            .map(|row| row.iter().zip(&fold_means).map(|(x, m)| x - m).collect())
            .collect();

        let mut cross = vec![vec![0.0; k]; k];
        for row in &centred {
            for i in 0..k {
                for j in i..k {
                    cross[i][j] += row[i] * row[j];
                }
            }
        }
        for i in 0..k {
            for j in 0..i {
                cross[i][j] = cross[j][i];
            }
        }
        let covariance_matrix: Vec<Vec<f64>> = cross
            .iter()
            .map(|row| row.iter().map(|s| s / rf).collect())
            .collect();
        let covariance_matrix_sample: Vec<Vec<f64>> = cross
            .iter()
            .map(|row| row.iter().map(|s| s / (rf - 1.0)).collect())
            .collect();
        let fold_variance_vector: Vec<f64> = (0..k).map(|i| covariance_matrix[i][i]).collect();

        let estimator_mean = shifted_mean(&run_estimates);
        let ss: f64 = run_estimates.iter().map(|t| (t - estimator_mean).powi(2)).sum();
        let estimator_variance = ss / rf;
        let estimator_variance_sample = ss / (rf - 1.0);
        let variance_independent = fold_variance_vector.iter().sum::<f64>() / (kf * kf);

        // Per-repetition mean of off-diagonal products; its average is the
        // mean off-diagonal covariance.
        let pairs = (k * k.saturating_sub(1)) as f64;
        let (mean_offdiag_covariance, mean_offdiag_covariance_se) = if k < 2 {
            (0.0, 0.0)
        } else {
            let per_rep: Vec<f64> = centred
                .iter()
                .map(|row| {
                    let total: f64 = row.iter().sum();
                    let diag: f64 = row.iter().map(|x| x * x).sum();
                    (total * total - diag) / pairs
                })
                .collect();
            let mean = per_rep.iter().sum::<f64>() / rf;
            let var = per_rep.iter().map(|q| (q - mean).powi(2)).sum::<f64>() / (rf - 1.0);
            (mean, (var / rf).sqrt())
        };

        let mut report = Self {
            scheme,
            k,
            repetitions: r,
            fold_estimates,
            run_estimates,
            fold_means,
            fold_variance_vector,
            covariance_matrix,
            covariance_matrix_sample,
            estimator_mean,
            estimator_variance,
            estimator_variance_sample,
            variance_independent,
            mean_offdiag_covariance,
            mean_offdiag_covariance_se,
            reference_risk,
            bias: None,
            mse: None,
        };
        if let Some(theta) = reference_risk {
            let d = mse_decomposition(&report, Some(theta))?;
            report.bias = Some(d.bias);
            report.mse = Some(d);
        }
        Ok(report)
    }

    /// `(1/k²) · Σ_ij C_ij`.
    pub fn covariance_sum_variance(&self) -> f64 {
        let k = self.k as f64;
        self.covariance_matrix.iter().flatten().sum::<f64>() / (k * k)
    }
}

/// `MSE = mean_r (θ̂_r - θ)²`, `Bias = mean(θ̂) - θ`, `Var` in population form.
///
/// Uses `reference_risk` if given, otherwise the report's own reference.
pub fn mse_decomposition(report: &MonteCarloReport, reference_risk: Option<f64>) -> Result<MseDecomposition> {
    let theta = reference_risk
        .or(report.reference_risk)
        .ok_or(Error::MissingReference)?;
    let r = report.run_estimates.len() as f64;
    let mse = report
        .run_estimates
        .iter()
        .map(|t| (t - theta).powi(2))
        .sum::<f64>()
        / r;
    let bias = report.estimator_mean - theta;
    Ok(MseDecomposition {
        bias,
        bias_squared: bias * bias,
        variance: report.estimator_variance,
        mse,
    })
}

fn run_repetition(config: &MonteCarloConfig, rep: usize) -> Result<Vec<f64>> {
    let seed = rng::derive(config.seed, purpose::REPETITIONS + rep as u64);
    let drawn;
    let dataset = match &config.data_source {
        DataSource::FixedDataset { dataset } => dataset,
        DataSource::SyntheticGenerator { generator, n } => {
            drawn = generator.generate_iid(*n, seed)?;
            &drawn
        }
    };
    let options = RunOptions {
        scheme: config.scheme,
        k: config.k,
        seed,
        stratified: config.stratified,
        strategy: config.strategy,
        parallel: false,
    };
    let report = run_scheme(dataset, &options, &config.model, &[config.metric])?;
    Ok(report
        .folds
        .iter()
        .map(|f| 1.0 - f.metrics[0].value)
        .collect())
}

/// Repeat a cross-validation scheme `R` times and collect fold-level moments.
///
/// Repetition `r` uses one seed derived from `(seed, r)` for both the
/// partition and (in synthetic mode) the data draw, so IkF and kF configs
/// that differ only in `scheme` see identical datasets and test folds. (Plain
/// `seed ^ r` would make every seed below `R` replay the same repetitions.)
pub fn monte_carlo(config: &MonteCarloConfig) -> Result<MonteCarloReport> {
    if config.repetitions < 2 {
        return Err(Error::InsufficientRepetitions(config.repetitions));
    }
    if let Some(theta) = config.reference_risk {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::InvalidSpec(format!("reference risk {theta} is outside [0, 1]")));
        }
    }
    let fold_estimates: Vec<Vec<f64>> = if config.parallel {
        (0..config.repetitions)
            .into_par_iter()
            .map(|rep| run_repetition(config, rep))
            .collect::<Result<_>>()?
    } else {
        (0..config.repetitions)
            .map(|rep| run_repetition(config, rep))
            .collect::<Result<_>>()?
    };
    MonteCarloReport::from_fold_estimates(config.scheme, fold_estimates, config.reference_risk)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub risk: f64,
    pub std_error: f64,
    pub train_size: usize,
    pub holdout_size: usize,
    pub draws: usize,
}

/// Misclassification risk of `learner` trained on `train_size` fresh samples,
/// measured on a fresh holdout and averaged over `draws` independent training
/// sets.
pub fn estimate_reference_risk(
    generator: &SyntheticGenerator,
    learner: &dyn Learner,
    train_size: usize,
    holdout_size: usize,
    draws: usize,
    seed: u64,
) -> Result<RiskEstimate> {
    if holdout_size < MIN_HOLDOUT {
        return Err(Error::InvalidSpec(format!(
            "holdout must have at least {MIN_HOLDOUT} samples, got {holdout_size}"
        )));
    }
    if draws == 0 || train_size == 0 {
        return Err(Error::InvalidSpec("need at least one draw and one training sample".into()));
    }
    let risks = (0..draws)
        .map(|d| {
            let base = rng::derive(seed, purpose::HOLDOUT + d as u64);
            let train = generator.generate_iid(train_size, rng::derive(base, 0))?;
            let holdout = generator.generate_iid(holdout_size, rng::derive(base, 1))?;
            let model = learner.fit(train.features().view(), train.labels())?;
            let predicted = model.predict(holdout.features().view())?;
            let cm = confusion(holdout.labels(), &predicted, generator.n_classes())?;
            Ok(1.0 - accuracy(&cm)?.value)
        })
        .collect::<Result<Vec<f64>>>()?;
    let n = draws as f64;
    let risk = risks.iter().sum::<f64>() / n;
    let std_error = if draws >= 2 {
        let var = risks.iter().map(|x| (x - risk).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        (risk * (1.0 - risk) / holdout_size as f64).sqrt()
    };
    Ok(RiskEstimate {
        risk,
        std_error,
        train_size,
        holdout_size,
        draws,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub generator: SyntheticGenerator,
    pub n: usize,
    pub model: ModelSpec,
    pub k_values: Vec<usize>,
    pub repetitions: usize,
    pub seed: u64,
    /// Target risk; estimated for a model trained on all `n` samples when absent.
    pub reference_risk: Option<f64>,
    pub parallel: bool,
}

/// One row of the bias/variance trade-off table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeOffRow {
    pub scheme: Scheme,
    pub k: usize,
    pub bias: f64,
    #[serde(rename = "var_indep")]
    pub variance_independent: f64,
    #[serde(rename = "var_cov")]
    pub variance_with_cov: f64,
    pub mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeOffTable {
    pub reference_risk: f64,
    pub rows: Vec<TradeOffRow>,
}

/// Bias, variance (with and without fold covariances) and MSE for both
/// schemes at every `k`.
pub fn trade_off_sweep(config: &SweepConfig) -> Result<TradeOffTable> {
    let reference_risk = match config.reference_risk {
        Some(theta) => theta,
        None => {
            estimate_reference_risk(&config.generator, &config.model, config.n, MIN_HOLDOUT, 10, config.seed)?
                .risk
        }
    };
    let mut rows = Vec::new();
    for &k in &config.k_values {
        for scheme in [Scheme::Ikf, Scheme::Kf] {
            let mc = MonteCarloConfig {
                repetitions: config.repetitions,
                reference_risk: Some(reference_risk),
                seed: config.seed,
                parallel: config.parallel,
                ..MonteCarloConfig::new(
                    scheme,
                    k,
                    config.model,
                    DataSource::SyntheticGenerator {
                        generator: config.generator.clone(),
                        n: config.n,
                    },
                )
            };
            let report = monte_carlo(&mc)?;
            let d = report.mse.expect("reference risk set");
            rows.push(TradeOffRow {
                scheme,
                k,
                bias: d.bias,
                variance_independent: report.variance_independent,
                variance_with_cov: report.estimator_variance,
                mse: d.mse,
            });
        }
    }
    Ok(TradeOffTable { reference_risk, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(rows: Vec<Vec<f64>>, theta: Option<f64>) -> MonteCarloReport {
        MonteCarloReport::from_fold_estimates(Scheme::Kf, rows, theta).unwrap()
    }

    #[test]
    fn needs_two_repetitions() {
        assert!(matches!(
            MonteCarloReport::from_fold_estimates(Scheme::Ikf, vec![vec![0.1, 0.2]], None),
            Err(Error::InsufficientRepetitions(1))
        ));
    }

    #[test]
    fn two_point_mse() {
        let theta = 0.3;
        let r = report(vec![vec![theta + 0.1; 3], vec![theta - 0.1; 3]], Some(theta));
        let d = r.mse.unwrap();
        assert!(d.bias.abs() < 1e-15);
        assert!((d.variance - 0.01).abs() < 1e-15);
        assert!((d.mse - 0.01).abs() < 1e-15);
    }

    #[test]
    fn constant_estimates() {
        let r = report(vec![vec![0.25; 4]; 5], Some(0.25));
        assert_eq!(r.estimator_variance, 0.0);
        assert!(r.fold_variance_vector.iter().all(|&v| v == 0.0));
        let d = r.mse.unwrap();
        assert_eq!((d.bias, d.variance, d.mse), (0.0, 0.0, 0.0));
    }

    #[test]
    fn missing_reference() {
        let r = report(vec![vec![0.1, 0.2], vec![0.3, 0.1]], None);
        assert!(r.bias.is_none());
        assert!(matches!(mse_decomposition(&r, None), Err(Error::MissingReference)));
        assert!(mse_decomposition(&r, Some(0.2)).is_ok());
    }

    #[test]
    fn covariance_matches_direct_formula() {
        let rows = vec![
            vec![0.1, 0.4, 0.3],
            vec![0.2, 0.1, 0.5],
            vec![0.3, 0.3, 0.2],
            vec![0.6, 0.2, 0.1],
        ];
        let r = report(rows.clone(), None);
        let mean = |i: usize| rows.iter().map(|x| x[i]).sum::<f64>() / 4.0;
        for i in 0..3 {
            for j in 0..3 {
                let direct = rows
                    .iter()
                    .map(|x| (x[i] - mean(i)) * (x[j] - mean(j)))
                    .sum::<f64>()
                    / 4.0;
                assert!((r.covariance_matrix[i][j] - direct).abs() < 1e-15);
                assert!((r.covariance_matrix_sample[i][j] - direct * 4.0 / 3.0).abs() < 1e-15);
            }
        }
        let offdiag: f64 = (0..3)
            .flat_map(|i| (0..3).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| r.covariance_matrix[i][j])
            .sum::<f64>()
            / 6.0;
        assert!((r.mean_offdiag_covariance - offdiag).abs() < 1e-15);
        assert!((r.estimator_variance - r.covariance_sum_variance()).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_reference() {
        let g = SyntheticGenerator::two_gaussians_1d(0.0, 2.0);
        let mut cfg = MonteCarloConfig::new(
            Scheme::Ikf,
            2,
            ModelSpec::GaussianNb,
            DataSource::SyntheticGenerator { generator: g, n: 20 },
        );
        cfg.reference_risk = Some(1.5);
        assert!(matches!(monte_carlo(&cfg), Err(Error::InvalidSpec(_))));
        cfg.reference_risk = None;
        cfg.repetitions = 1;
        assert!(matches!(monte_carlo(&cfg), Err(Error::InsufficientRepetitions(1))));
    }

    #[test]
    fn holdout_minimum_enforced() {
        let g = SyntheticGenerator::two_gaussians_1d(0.0, 2.0);
        assert!(estimate_reference_risk(&g, &ModelSpec::GaussianNb, 10, 1000, 1, 0).is_err());
    }
}
