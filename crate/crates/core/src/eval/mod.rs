//! Periodic evaluation over a test log.
//!
//! Each test case is predicted at `t0 = start + i·meanDur/N` for
//! `i = 1..=2N` while it is still running; errors are `predicted − actual`
//! in seconds.

mod report;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use report::{parse_report_csv, plot_series, write_report_csv, write_report_json};

use crate::error::{Error, Result};
use crate::event_log::{EventLog, Trace};
use crate::gdtspn::SimulationConfig;
use crate::knn::DEFAULT_K;
use crate::predict::{
    benchmark_average, benchmark_knn_average, predict_gdtspn, predict_gdtspn_knn, ModelCache,
    Prediction, PredictionMethod,
};
use crate::seed::{fnv1a, mix, prediction_seed};
use crate::Timestamp;

pub type Method = PredictionMethod;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Iterations per mean duration; `2N` iterations are run.
    pub n: usize,
    pub k: usize,
    pub n_runs: usize,
    pub max_firings_per_run: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    /// Benchmarks subtract the elapsed time from their mean duration.
    pub subtract_elapsed: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 20,
            k: DEFAULT_K,
            n_runs: 500,
            max_firings_per_run: 10_000,
            seed: 0,
            methods: Method::all(),
            subtract_elapsed: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodMetrics {
    pub method: Method,
    /// `None` when no prediction succeeded.
    pub mean_error_s: Option<f64>,
    pub rmse_s: Option<f64>,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationMetrics {
    pub iteration: usize,
    /// Test cases still running at this iteration.
    pub active_traces: usize,
    pub methods: Vec<MethodMetrics>,
}

/// Prediction time of iteration `i`; exact integer arithmetic, so iteration
/// `N` falls exactly `mean_ms` after the start.
pub fn iteration_time(start: Timestamp, i: usize, mean_ms: i64, n: usize) -> Timestamp {
    start + ((i as i128 * mean_ms as i128) / n as i128) as Timestamp
}

/// One (test case, iteration) cell of the evaluation grid.
pub struct PredictionRequest<'a> {
    pub trace: &'a Trace,
    pub iteration: usize,
    pub t0: Timestamp,
}

fn method_key(m: Method) -> u64 {
    fnv1a(m.to_string().as_bytes())
}

fn predict_one(
    train: &EventLog,
    cache: &ModelCache,
    cfg: &ExperimentConfig,
    task: &PredictionRequest<'_>,
    method: Method,
) -> Result<Prediction> {
    let prefix = task.trace.prefix_at(task.t0)?;
    let seed = mix(
        prediction_seed(cfg.seed, task.trace.case_id(), task.iteration as u64),
        &[method_key(method)],
    );
    let sim = SimulationConfig {
        n_runs: cfg.n_runs,
        max_firings_per_run: cfg.max_firings_per_run,
        seed,
    };
    match method {
        Method::GdtspnKnn => predict_gdtspn_knn(train, &prefix, task.t0, cfg.k.min(train.len()), &sim),
        Method::Gdtspn => predict_gdtspn(train, &prefix, task.t0, &sim, cache),
        Method::Average => benchmark_average(train, task.t0 - prefix.start(), cfg.subtract_elapsed),
        Method::KnnAverage(k) => benchmark_knn_average(
            train,
            &prefix,
            task.t0,
            k.min(train.len()),
            seed,
            cfg.subtract_elapsed,
        ),
    }
}

/// Runs the periodic evaluation. Individual prediction failures are counted,
/// not fatal. The result is independent of the rayon pool size.
pub fn run_experiment(
    train: &EventLog,
    test: &EventLog,
    cfg: &ExperimentConfig,
) -> Result<Vec<IterationMetrics>> {
    if cfg.n_runs == 0 || cfg.k == 0 {
        return Err(Error::InvalidArgument("k and n must be at least 1".into()));
    }
    if train.is_empty() || test.is_empty() {
        return Err(Error::EmptyLog);
    }
    let mean_ms = train.mean_case_duration_ms()?;

    let cache = ModelCache::new();
    if cfg.methods.contains(&Method::Gdtspn) {
        // failures surface per prediction; building here keeps the fan-out read-only
        if let Err(e) = cache.get_or_build(train) {
            log::warn!("full-log model: {e}");
        }
    }

    evaluate_with(test, mean_ms, cfg.n, &cfg.methods, |req, m| {
        predict_one(train, &cache, cfg, req, m).map(|p| p.remaining_s)
    })
}

/// Runs the prediction grid with an arbitrary predictor returning remaining
/// seconds, and aggregates signed errors per iteration and method.
pub fn evaluate_with<F>(
    test: &EventLog,
    mean_ms: i64,
    n: usize,
    methods: &[Method],
    predict: F,
) -> Result<Vec<IterationMetrics>>
where
    F: Fn(&PredictionRequest<'_>, Method) -> Result<f64> + Sync,
{
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    let iterations = 2 * n;
    let mut tasks = Vec::new();
    for i in 1..=iterations {
        for trace in test.traces() {
            let t0 = iteration_time(trace.start(), i, mean_ms, n);
            if trace.end() > t0 {
                tasks.push(PredictionRequest {
                    trace,
                    iteration: i,
                    t0,
                });
            }
        }
    }
    log::info!(
        "{} predictions per method over {iterations} iterations",
        tasks.len()
    );

    let results: Vec<Vec<Result<f64>>> = tasks
        .par_iter()
        .map(|task| {
            let actual_s = (task.trace.end() - task.t0) as f64 / 1000.0;
            methods
                .iter()
                .map(|&m| predict(task, m).map(|p| p - actual_s))
                .collect()
        })
        .collect();

    let mut out = Vec::with_capacity(iterations);
    for i in 1..=iterations {
        let rows: Vec<&Vec<Result<f64>>> = tasks
            .iter()
            .zip(&results)
            .filter(|(t, _)| t.iteration == i)
            .map(|(_, r)| r)
            .collect();
        let metrics = methods
            .iter()
            .enumerate()
            .map(|(j, &method)| {
                let mut errors = Vec::with_capacity(rows.len());
                let mut failures = 0;
                for r in &rows {
                    match &r[j] {
                        Ok(e) => errors.push(*e),
                        Err(err) => {
                            failures += 1;
                            log::debug!("iteration {i} {method}: {err}");
                        }
                    }
                }
                let (mean_error_s, rmse_s) = if errors.is_empty() {
                    (None, None)
                } else {
                    let n = errors.len() as f64;
                    let mean = errors.iter().sum::<f64>() / n;
                    let mse = errors.iter().map(|e| e * e).sum::<f64>() / n;
                    (Some(mean), Some(mse.sqrt()))
                };
                MethodMetrics {
                    method,
                    mean_error_s,
                    rmse_s,
                    failures,
                }
            })
            .collect();
        log::info!("iteration {i}/{iterations}: {} active", rows.len());
        out.push(IterationMetrics {
            iteration: i,
            active_traces: rows.len(),
            methods: metrics,
        });
    }
    Ok(out)
}
