use std::sync::{Arc, Mutex};

use ikf::harness::{compare, run_scheme, RunOptions};
use ikf::learners::{Classifier, Learner};
use ikf::stats::{mse_decomposition, monte_carlo, DataSource, MonteCarloConfig, MonteCarloReport};
use ikf::synthetic::SyntheticGenerator;
use ikf::{Dataset, Metric, ModelSpec, PartitionPlan, Result, Scheme};
use ndarray::{Array2, ArrayView2};
use proptest::prelude::*;

fn gaussian_task() -> DataSource {
    DataSource::SyntheticGenerator {
        generator: SyntheticGenerator::two_gaussians_1d(0.0, 2.0),
        n: 300,
    }
}

fn mc(scheme: Scheme, source: DataSource, reps: usize, seed: u64) -> MonteCarloReport {
    monte_carlo(&MonteCarloConfig {
        repetitions: reps,
        seed,
        reference_risk: Some(0.16),
        ..MonteCarloConfig::new(scheme, 5, ModelSpec::GaussianNb, source)
    })
    .unwrap()
}

fn assert_identities(r: &MonteCarloReport) {
    let k = r.k as f64;
    let total: f64 = r.covariance_matrix.iter().flatten().sum();
    let rel = (r.estimator_variance - total / (k * k)).abs() / r.estimator_variance.abs().max(f64::MIN_POSITIVE);
    assert!(rel < 1e-10, "variance identity off by {rel:e}");
    let d = r.mse.unwrap();
    assert!((d.mse - (d.bias_squared + d.variance)).abs() < 1e-12);
    for (i, row) in r.covariance_matrix.iter().enumerate() {
        assert_eq!(row[i], r.fold_variance_vector[i]);
        for (j, &v) in row.iter().enumerate() {
            assert_eq!(v, r.covariance_matrix[j][i]);
        }
    }
    assert!(r.estimator_variance >= 0.0);
}

#[test]
fn moment_identities_hold_for_both_schemes_and_sources() {
    let fixed = DataSource::FixedDataset {
        dataset: SyntheticGenerator::two_gaussians_1d(0.0, 2.0).generate(300, 5).unwrap(),
    };
    for scheme in [Scheme::Ikf, Scheme::Kf] {
        assert_identities(&mc(scheme, gaussian_task(), 60, 1));
        assert_identities(&mc(scheme, fixed.clone(), 60, 1));
    }
}

#[test]
fn distinct_seeds_give_distinct_experiments() {
    // Small seeds must not replay one another's repetitions.
    let a = mc(Scheme::Kf, gaussian_task(), 20, 1);
    let b = mc(Scheme::Kf, gaussian_task(), 20, 2);
    assert_ne!(a.estimator_mean, b.estimator_mean);
    assert_eq!(a, mc(Scheme::Kf, gaussian_task(), 20, 1));
}

#[test]
fn parallel_flag_does_not_change_results() {
    let config = MonteCarloConfig {
        repetitions: 30,
        ..MonteCarloConfig::new(Scheme::Ikf, 4, ModelSpec::Knn { neighbors: 3 }, gaussian_task())
    };
    let serial = monte_carlo(&MonteCarloConfig {
        parallel: false,
        ..config.clone()
    })
    .unwrap();
    assert_eq!(serial, monte_carlo(&config).unwrap());
}

#[test]
fn constant_classifier_has_zero_variance_with_fixed_fold_composition() {
    // 40 + 20 samples, stratified, k = 5: every test fold holds 8 + 4 samples
    // in every repetition, so a constant prediction always scores the same.
    let labels: Vec<usize> = (0..60).map(|i| usize::from(i >= 40)).collect();
    let features = Array2::from_shape_fn((60, 1), |(i, _)| i as f64);
    let dataset = Dataset::new(features, labels, 2).unwrap();
    for scheme in [Scheme::Ikf, Scheme::Kf] {
        let r = monte_carlo(&MonteCarloConfig {
            repetitions: 25,
            stratified: true,
            ..MonteCarloConfig::new(
                scheme,
                5,
                ModelSpec::Constant { class: 0 },
                DataSource::FixedDataset {
                    dataset: dataset.clone(),
                },
            )
        })
        .unwrap();
        assert!(r.fold_variance_vector.iter().all(|&v| v == 0.0));
        assert!(r.covariance_matrix.iter().flatten().all(|&v| v == 0.0));
        assert_eq!(r.estimator_variance, 0.0);
        assert!((r.estimator_mean - 1.0 / 3.0).abs() < 1e-15);
    }
}

#[test]
fn mse_decomposition_two_point_example() {
    let r = MonteCarloReport::from_fold_estimates(Scheme::Kf, vec![vec![0.4, 0.4], vec![0.2, 0.2]], None).unwrap();
    let d = mse_decomposition(&r, Some(0.3)).unwrap();
    assert!(d.bias.abs() < 1e-15);
    assert!((d.variance - 0.01).abs() < 1e-15);
    assert!((d.mse - 0.01).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn identities_and_order_invariance_on_arbitrary_estimates(
        rows in (2usize..6).prop_flat_map(|k| proptest::collection::vec(proptest::collection::vec(0.0f64..1.0, k), 2..40)),
        theta in 0.0f64..1.0,
        rotate in 0usize..40,
    ) {
        let r = MonteCarloReport::from_fold_estimates(Scheme::Ikf, rows.clone(), Some(theta)).unwrap();
        assert_identities(&r);

        let mut shuffled = rows;
        let len = shuffled.len();
        shuffled.rotate_left(rotate % len);
        shuffled.reverse();
        let s = MonteCarloReport::from_fold_estimates(Scheme::Ikf, shuffled, Some(theta)).unwrap();
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + a.abs());
        prop_assert!(close(r.estimator_mean, s.estimator_mean));
        prop_assert!(close(r.estimator_variance, s.estimator_variance));
        prop_assert!(close(r.mean_offdiag_covariance, s.mean_offdiag_covariance));
        for (a, b) in r.covariance_matrix.iter().flatten().zip(s.covariance_matrix.iter().flatten()) {
            prop_assert!(close(*a, *b));
        }
        prop_assert!(close(r.mse.unwrap().mse, s.mse.unwrap().mse));
    }
}

/// Records which rows (encoded as the single feature value) each fit and
/// predict call sees.
#[derive(Default, Clone)]
struct Recorder {
    trained: Arc<Mutex<Vec<Vec<usize>>>>,
    tested: Arc<Mutex<Vec<Vec<usize>>>>,
}

struct RecordingClassifier(Arc<Mutex<Vec<Vec<usize>>>>);

fn rows(x: ArrayView2<'_, f64>) -> Vec<usize> {
    x.column(0).iter().map(|&v| v as usize).collect()
}

impl Classifier for RecordingClassifier {
    fn predict(&self, features: ArrayView2<'_, f64>) -> Result<Vec<usize>> {
        self.0.lock().unwrap().push(rows(features));
        Ok(vec![0; features.nrows()])
    }
}

impl Learner for Recorder {
    fn fit(&self, features: ArrayView2<'_, f64>, _labels: &[usize]) -> Result<Box<dyn Classifier>> {
        self.trained.lock().unwrap().push(rows(features));
        Ok(Box::new(RecordingClassifier(self.tested.clone())))
    }
}

#[test]
fn every_sample_trains_once_and_tests_once_per_ikf_run() {
    let n = 137;
    let features = Array2::from_shape_fn((n, 1), |(i, _)| i as f64);
    let labels: Vec<usize> = (0..n).map(|i| i % 3).collect();
    let dataset = Dataset::new(features, labels.clone(), 3).unwrap();
    for (seed, stratified) in [(0, false), (1, true), (2, false)] {
        let rec = Recorder::default();
        let opts = RunOptions {
            k: 4,
            seed,
            stratified,
            ..RunOptions::default()
        };
        run_scheme(&dataset, &opts, &rec, &[Metric::Accuracy]).unwrap();
        for log in [&rec.trained, &rec.tested] {
            let mut seen: Vec<usize> = log.lock().unwrap().iter().flatten().copied().collect();
            seen.sort_unstable();
            assert_eq!(seen, (0..n).collect::<Vec<_>>());
        }
        // The learner saw exactly the plan's training sets.
        let plan = PartitionPlan::new(n, Some(&labels), 4, seed, stratified, Default::default()).unwrap();
        let mut trained = rec.trained.lock().unwrap().clone();
        trained.iter_mut().for_each(|t| t.sort_unstable());
        trained.sort();
        let mut expected: Vec<Vec<usize>> = ikf::partition::build_ikf_splits(&plan)
            .unwrap()
            .into_iter()
            .map(|s| s.train_indices)
            .collect();
        expected.sort();
        assert_eq!(trained, expected);
    }
}

#[test]
fn reports_round_trip_through_json() {
    let dataset = SyntheticGenerator::blobs(3, 2, 3.0).unwrap().generate(120, 1).unwrap();
    let metrics = [Metric::Accuracy, Metric::FScoreMacro];
    let learner = ModelSpec::Knn { neighbors: 3 };
    let run = run_scheme(&dataset, &RunOptions::default(), &learner, &metrics).unwrap();
    let back: ikf::harness::EvaluationReport = serde_json::from_str(&serde_json::to_string(&run).unwrap()).unwrap();
    assert_eq!(back, run);

    let cmp = compare(&dataset, &RunOptions::default(), &learner, &metrics, 2).unwrap();
    let back: ikf::harness::ComparisonReport = serde_json::from_str(&serde_json::to_string(&cmp).unwrap()).unwrap();
    assert_eq!(back, cmp);

    let report = mc(Scheme::Ikf, gaussian_task(), 10, 3);
    let back: MonteCarloReport = serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
    assert_eq!(back, report);

    let plan = PartitionPlan::new(40, None, 4, 0, false, Default::default()).unwrap();
    let back: PartitionPlan = serde_json::from_str(&serde_json::to_string(&plan).unwrap()).unwrap();
    assert_eq!(back, plan);

    let back: Dataset = serde_json::from_str(&serde_json::to_string(&dataset).unwrap()).unwrap();
    assert_eq!(back, dataset);
}
