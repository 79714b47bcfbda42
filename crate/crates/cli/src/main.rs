//! `ikf` command-line tool.
//!
//! Exit codes: 0 success, 1 I/O, parse or usage errors, 2 infeasible
//! configuration (the message says how to fix it).

mod args;
mod output;

use std::io::Write;
use std::process::ExitCode;

use anyhow::{bail, ensure, Context};
use clap::Parser;
use ikf::harness::{compare, run_scheme, ComparisonReport, EvaluationReport, RunOptions};
use ikf::io::load_csv;
use ikf::partition::{check_feasibility, check_kf_feasibility, make_splits, PartitionPlan};
use ikf::stats::{
    estimate_reference_risk, monte_carlo, trade_off_sweep, DataSource, MonteCarloConfig, MonteCarloReport,
    RiskEstimate, SweepConfig, TradeOffTable, MIN_HOLDOUT,
};
use ikf::synthetic::SyntheticGenerator;
use ikf::{AssignmentStrategy, Dataset, FeasibilityVerdict, Metric, ModelSpec, Scheme, SplitPair};
use serde::{Deserialize, Serialize};

use args::*;
use output::{num, opt, sci, table};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version go to stdout with exit 0; usage errors exit 1
            // so that 2 always means "infeasible".
            let _ = e.print();
            return if e.use_stderr() { ExitCode::FAILURE } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let infeasible = e
                .chain()
                .any(|c| c.downcast_ref::<ikf::Error>().is_some_and(ikf::Error::is_infeasible));
            ExitCode::from(if infeasible { 2 } else { 1 })
        }
    }
}

fn dispatch(command: Command) -> anyhow::Result<ExitCode> {
    let (text, code) = match command {
        Command::Split(a) => (split(a)?, ExitCode::SUCCESS),
        Command::Run(a) => (run(a)?, ExitCode::SUCCESS),
        Command::Compare(a) => (compare_cmd(a)?, ExitCode::SUCCESS),
        Command::Montecarlo(a) => (montecarlo(a)?, ExitCode::SUCCESS),
        Command::Sweep(a) => (sweep(a)?, ExitCode::SUCCESS),
        Command::Check(a) => check(a)?,
    };
    let mut stdout = std::io::stdout().lock();
    stdout.write_all(text.as_bytes())?;
    stdout.flush()?;
    Ok(code)
}

/// Shape and provenance of the evaluated data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub name: String,
    pub n_samples: usize,
    pub n_features: usize,
    pub n_classes: usize,
    pub class_names: Vec<String>,
    pub standardized: bool,
}

struct Loaded {
    dataset: Dataset,
    info: DatasetInfo,
    generator: Option<SyntheticGenerator>,
}

fn generator(data: &DataArgs, preset: Preset) -> anyhow::Result<SyntheticGenerator> {
    Ok(match preset {
        Preset::Gauss1d => SyntheticGenerator::two_gaussians_1d(0.0, data.separation),
        Preset::Blobs => SyntheticGenerator::blobs(data.classes, data.dims, data.separation)?,
    })
}

fn load(data: &DataArgs, seed: u64) -> anyhow::Result<Loaded> {
    let (dataset, name, generator) = if let Some(schema) = data.csv_schema() {
        let schema = schema?;
        let dataset = load_csv(&schema).with_context(|| format!("reading {}", schema.path.display()))?;
        let name = schema
            .path
            .file_stem()
            .map_or_else(|| "csv".to_string(), |s| s.to_string_lossy().into_owned());
        (dataset, name, None)
    } else if let Some(preset) = data.synthetic {
        let n = data.n.context("--synthetic needs --n")?;
        let g = generator(data, preset)?;
        let dataset = g.generate(n, data.data_seed.unwrap_or(seed))?;
        let name = format!("{preset:?}").to_lowercase();
        (dataset, name, Some(g))
    } else {
        bail!("no data: pass --csv FILE or --synthetic PRESET --n N");
    };
    let dataset = if data.standardize { dataset.standardized() } else { dataset };
    let info = DatasetInfo {
        name,
        n_samples: dataset.n_samples(),
        n_features: dataset.n_features(),
        n_classes: dataset.n_classes(),
        class_names: dataset.class_names().to_vec(),
        standardized: data.standardize,
    };
    Ok(Loaded {
        dataset,
        info,
        generator,
    })
}

fn metrics(list: &[MetricArg]) -> anyhow::Result<Vec<Metric>> {
    ensure!(!list.is_empty(), "--metrics must name at least one metric");
    let mut out: Vec<Metric> = Vec::new();
    for &m in list {
        let m = Metric::from(m);
        if !out.contains(&m) {
            out.push(m);
        }
    }
    Ok(out)
}

fn run_options(scheme: Scheme, p: &PartitionArgs) -> RunOptions {
    RunOptions {
        scheme,
        k: p.k,
        seed: p.seed,
        stratified: p.stratified,
        strategy: p.assignment.into(),
        parallel: p.parallel == Toggle::On,
    }
}

// ---------------------------------------------------------------- split

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitOutput {
    pub scheme: Scheme,
    pub k: usize,
    pub n: usize,
    pub seed: u64,
    pub stratified: bool,
    pub assignment: AssignmentStrategy,
    pub splits: Vec<SplitPair>,
    /// Folds, subfolds and assignment matrix (IkF only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan: Option<PartitionPlan>,
}

fn split(a: SplitArgs) -> anyhow::Result<String> {
    let p = &a.partition;
    let (n, labels) = if a.data.csv.is_some() || a.data.synthetic.is_some() {
        let loaded = load(&a.data, p.seed)?;
        (loaded.dataset.n_samples(), Some(loaded.dataset.labels().to_vec()))
    } else {
        match (a.data.n, a.labels) {
            (Some(n), Some(l)) => {
                ensure!(l.len() == n, "--labels has {} entries but --n is {n}", l.len());
                (n, Some(l))
            }
            (None, Some(l)) => (l.len(), Some(l)),
            (Some(n), None) => (n, None),
            (None, None) => bail!("split needs --n, --labels, --csv or --synthetic"),
        }
    };
    let scheme = Scheme::from(a.scheme);
    let strategy = AssignmentStrategy::from(p.assignment);
    let splits = make_splits(n, labels.as_deref(), p.k, p.seed, p.stratified, scheme, strategy)?;
    let plan = match scheme {
        Scheme::Ikf => Some(PartitionPlan::new(n, labels.as_deref(), p.k, p.seed, p.stratified, strategy)?),
        Scheme::Kf => None,
    };
    let out = SplitOutput {
        scheme,
        k: p.k,
        n,
        seed: p.seed,
        stratified: p.stratified,
        assignment: strategy,
        splits,
        plan,
    };
    match a.format {
        Format::Json => output::json("split", &out),
        Format::Md => {
            let rows: Vec<Vec<String>> = out
                .splits
                .iter()
                .map(|s| {
                    vec![
                        s.iteration.to_string(),
                        s.train_indices.len().to_string(),
                        s.test_indices.len().to_string(),
                        join(&s.test_indices),
                    ]
                })
                .collect();
            Ok(format!(
                "{scheme} splits: n = {n}, k = {}, seed = {}\n\n{}",
                p.k,
                p.seed,
                table(&["Iteration", "Train", "Test", "Test indices"], &rows)
            ))
        }
    }
}

fn join(xs: &[usize]) -> String {
    xs.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

// ---------------------------------------------------------------- run

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    pub dataset: DatasetInfo,
    pub model: ModelSpec,
    pub report: EvaluationReport,
}

fn run(a: RunArgs) -> anyhow::Result<String> {
    let loaded = load(&a.data, a.partition.seed)?;
    let metrics = metrics(&a.metrics)?;
    let model = a.model.spec();
    let opts = run_options(a.scheme.into(), &a.partition);
    let report = run_scheme(&loaded.dataset, &opts, &model, &metrics)?;
    let out = RunOutput {
        dataset: loaded.info,
        model,
        report,
    };
    match a.format {
        Format::Json => output::json("run", &out),
        Format::Md => {
            let mut headers: Vec<String> = vec!["Iteration".into(), "Train".into(), "Test".into()];
            headers.extend(metrics.iter().map(|m| m.short_name().to_string()));
            headers.extend(["Fit (s)".into(), "Predict (s)".into()]);
            let mut rows: Vec<Vec<String>> = out
                .report
                .folds
                .iter()
                .map(|f| {
                    let mut row = vec![f.iteration.to_string(), f.train_size.to_string(), f.test_size.to_string()];
                    row.extend(f.metrics.iter().map(|m| num(m.value, 4)));
                    row.extend([num(f.fit_time, 4), num(f.predict_time, 4)]);
                    row
                })
                .collect();
            let mut mean = vec!["Mean".into(), String::new(), String::new()];
            mean.extend(out.report.mean_metrics.iter().map(|m| num(m.value, 4)));
            mean.extend([format!("total {}", num(out.report.total_time, 4)), String::new()]);
            rows.push(mean);
            Ok(format!(
                "{} on {} (n = {}, k = {}, seed = {})\n\n{}",
                out.report.scheme,
                out.dataset.name,
                out.dataset.n_samples,
                out.report.k,
                out.report.seed,
                table(&headers, &rows)
            ))
        }
    }
}

// ---------------------------------------------------------------- compare

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareOutput {
    pub dataset: DatasetInfo,
    pub model: ModelSpec,
    pub report: ComparisonReport,
}

fn compare_cmd(a: CompareArgs) -> anyhow::Result<String> {
    let loaded = load(&a.data, a.partition.seed)?;
    let metrics = metrics(&a.metrics)?;
    let model = a.model.spec();
    let opts = run_options(Scheme::Ikf, &a.partition);
    let report = compare(&loaded.dataset, &opts, &model, &metrics, a.repeats)?;
    let out = CompareOutput {
        dataset: loaded.info,
        model,
        report,
    };
    match a.format {
        Format::Json => output::json("compare", &out),
        Format::Md => Ok(compare_table(&out)),
    }
}

/// One results-table row: dataset shape, Acc/Fsc/Time per scheme, then the
/// kF/IkF ratios.
fn compare_table(out: &CompareOutput) -> String {
    let r = &out.report;
    let fsc = if r.ikf.mean(Metric::FScoreMacro).is_some() {
        Metric::FScoreMacro
    } else {
        Metric::FScoreBinary
    };
    let d = &out.dataset;
    let row = vec![
        d.name.clone(),
        d.n_samples.to_string(),
        d.n_features.to_string(),
        d.n_classes.to_string(),
        opt(r.ikf.mean(Metric::Accuracy), 3),
        opt(r.ikf.mean(fsc), 3),
        num(r.ikf.total_time, 3),
        opt(r.kf.mean(Metric::Accuracy), 3),
        opt(r.kf.mean(fsc), 3),
        num(r.kf.total_time, 3),
        opt(r.ratio(Metric::Accuracy), 3),
        opt(r.ratio(fsc), 3),
        opt(r.speed_up, 2),
    ];
    table(
        &[
            "Dataset", "#s", "#v", "#c", "IkF Acc", "IkF Fsc", "IkF Time", "kF Acc", "kF Fsc", "kF Time", "RAcc",
            "RFsc", "Speed-up",
        ],
        &[row],
    )
}

// ---------------------------------------------------------------- montecarlo

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloOutput {
    pub dataset: DatasetInfo,
    /// `fixed_dataset` re-partitions the same samples; `synthetic_generator`
    /// draws fresh samples every repetition.
    pub data_source: String,
    pub model: ModelSpec,
    pub metric: Metric,
    pub reference_risk: Option<f64>,
    /// Present when the reference risk was estimated rather than supplied.
    pub reference_estimate: Option<RiskEstimate>,
    pub reports: Vec<MonteCarloReport>,
}

fn montecarlo(a: MonteCarloArgs) -> anyhow::Result<String> {
    let p = &a.partition;
    let loaded = load(&a.data, p.seed)?;
    let model = a.model.spec();
    let (source, source_name) = match &loaded.generator {
        Some(g) => {
            ensure!(
                !a.data.standardize,
                "--standardize applies to fixed datasets, not fresh synthetic draws"
            );
            (
                DataSource::SyntheticGenerator {
                    generator: g.clone(),
                    n: loaded.dataset.n_samples(),
                },
                "synthetic_generator",
            )
        }
        None => (
            DataSource::FixedDataset {
                dataset: loaded.dataset.clone(),
            },
            "fixed_dataset",
        ),
    };
    let reference_estimate = if a.estimate_reference {
        let g = loaded
            .generator
            .as_ref()
            .context("--estimate-reference needs synthetic data")?;
        Some(estimate_reference_risk(g, &model, loaded.dataset.n_samples(), MIN_HOLDOUT, 10, p.seed)?)
    } else {
        None
    };
    let reference_risk = a.reference_risk.or(reference_estimate.map(|e| e.risk));
    let reports = a
        .scheme
        .schemes()
        .into_iter()
        .map(|scheme| {
            monte_carlo(&MonteCarloConfig {
                repetitions: a.repetitions,
                metric: a.metric.into(),
                reference_risk,
                seed: p.seed,
                stratified: p.stratified,
                strategy: p.assignment.into(),
                parallel: p.parallel == Toggle::On,
                ..MonteCarloConfig::new(scheme, p.k, model, source.clone())
            })
        })
        .collect::<ikf::Result<Vec<_>>>()?;
    let out = MonteCarloOutput {
        dataset: loaded.info,
        data_source: source_name.into(),
        model,
        metric: a.metric.into(),
        reference_risk,
        reference_estimate,
        reports,
    };
    match a.format {
        Format::Json => output::json("montecarlo", &out),
        Format::Md => {
            let rows: Vec<Vec<String>> = out
                .reports
                .iter()
                .map(|r| {
                    vec![
                        r.scheme.to_string(),
                        r.k.to_string(),
                        r.repetitions.to_string(),
                        num(r.estimator_mean, 5),
                        sci(r.estimator_variance),
                        sci(r.variance_independent),
                        sci(r.mean_offdiag_covariance),
                        sci(r.mean_offdiag_covariance_se),
                        opt(r.bias, 5),
                        r.mse.map_or_else(|| "-".into(), |m| sci(m.mse)),
                    ]
                })
                .collect();
            let reference = match out.reference_risk {
                Some(t) => format!("reference risk {}", num(t, 5)),
                None => "no reference risk".into(),
            };
            Ok(format!(
                "Monte-Carlo on {} ({}, {reference})\n\n{}",
                out.dataset.name,
                out.data_source,
                table(
                    &[
                        "Scheme",
                        "k",
                        "R",
                        "Mean risk",
                        "Var",
                        "Var (indep)",
                        "Mean cov",
                        "Cov SE",
                        "Bias",
                        "MSE",
                    ],
                    &rows,
                )
            ))
        }
    }
}

// ---------------------------------------------------------------- sweep

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutput {
    pub generator: SyntheticGenerator,
    pub n: usize,
    pub model: ModelSpec,
    pub repetitions: usize,
    pub seed: u64,
    pub table: TradeOffTable,
}

fn sweep(a: SweepArgs) -> anyhow::Result<String> {
    let preset = a.data.synthetic.context("sweep needs --synthetic PRESET --n N")?;
    ensure!(a.data.csv.is_none(), "sweep draws fresh samples and cannot use --csv");
    let n = a.data.n.context("sweep needs --n")?;
    ensure!(!a.k_values.is_empty(), "--k-values must not be empty");
    let model = a.model.spec();
    let g = generator(&a.data, preset)?;
    let t = trade_off_sweep(&SweepConfig {
        generator: g.clone(),
        n,
        model,
        k_values: a.k_values,
        repetitions: a.repetitions,
        seed: a.seed,
        reference_risk: a.reference_risk,
        parallel: a.parallel == Toggle::On,
    })?;
    let out = SweepOutput {
        generator: g,
        n,
        model,
        repetitions: a.repetitions,
        seed: a.seed,
        table: t,
    };
    let rows: Vec<Vec<String>> = out
        .table
        .rows
        .iter()
        .map(|r| {
            vec![
                r.scheme.to_string().to_lowercase(),
                r.k.to_string(),
                format!("{:e}", r.bias),
                format!("{:e}", r.variance_independent),
                format!("{:e}", r.variance_with_cov),
                format!("{:e}", r.mse),
            ]
        })
        .collect();
    let headers = ["scheme", "k", "bias", "var_indep", "var_cov", "mse"];
    match a.format {
        SweepFormat::Json => output::json("sweep", &out),
        SweepFormat::Md => Ok(format!(
            "Trade-off on {} (n = {n}, R = {}, reference risk {})\n\n{}",
            format!("{preset:?}").to_lowercase(),
            out.repetitions,
            num(out.table.reference_risk, 5),
            table(&headers, &rows)
        )),
        SweepFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(headers)?;
            for row in &rows {
                w.write_record(row)?;
            }
            Ok(String::from_utf8(w.into_inner()?)?)
        }
    }
}

// ---------------------------------------------------------------- check

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutput {
    pub scheme: Scheme,
    pub n: usize,
    pub class_counts: Option<Vec<usize>>,
    pub k: usize,
    pub stratified: bool,
    pub verdict: FeasibilityVerdict,
}

fn check(a: CheckArgs) -> anyhow::Result<(String, ExitCode)> {
    ensure!(a.k >= 2, "k must be at least 2");
    let n = match (a.n, &a.classes) {
        (Some(n), Some(c)) => {
            let total: usize = c.iter().sum();
            ensure!(total == n, "--classes sum to {total} but --n is {n}");
            n
        }
        (Some(n), None) => n,
        (None, Some(c)) => c.iter().sum(),
        (None, None) => bail!("check needs --n or --classes"),
    };
    ensure!(
        !a.stratified || a.classes.is_some(),
        "--stratified checks need per-class counts via --classes"
    );
    let scheme = Scheme::from(a.scheme);
    let counts = a.classes.as_deref();
    let verdict = match scheme {
        Scheme::Ikf => check_feasibility(n, counts, a.k, a.stratified),
        Scheme::Kf => check_kf_feasibility(n, counts, a.k, a.stratified),
    };
    let code = if verdict.feasible {
        ExitCode::SUCCESS
    } else {
        eprintln!("{}", verdict.message);
        ExitCode::from(2)
    };
    let out = CheckOutput {
        scheme,
        n,
        class_counts: a.classes,
        k: a.k,
        stratified: a.stratified,
        verdict,
    };
    let text = match a.format {
        Format::Json => output::json("check", &out)?,
        Format::Md => {
            let v = &out.verdict;
            let row = vec![
                out.scheme.to_string(),
                out.n.to_string(),
                out.k.to_string(),
                out.stratified.to_string(),
                v.required_minimum.to_string(),
                format!("{:?}", v.limiting_factor),
                v.largest_feasible_k.map_or_else(|| "-".into(), |k| k.to_string()),
                if v.feasible { "feasible" } else { "infeasible" }.into(),
            ];
            format!(
                "{}\n{}\n",
                table(
                    &[
                        "Scheme",
                        "n",
                        "k",
                        "Stratified",
                        "Required",
                        "Limited by",
                        "Largest k",
                        "Verdict"
                    ],
                    &[row],
                ),
                v.message
            )
        }
    };
    Ok((text, code))
}
