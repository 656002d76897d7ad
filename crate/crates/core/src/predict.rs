//! Remaining-time predictors.
//!
//! All predictors return remaining time in seconds, never negative.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::discovery::discover_net;
use crate::error::{Error, Result};
use crate::event_log::{EventLog, Trace};
use crate::gdtspn::{enrich, GdtSpn, SimulationConfig};
use crate::knn::{select_neighbors, NeighborSelection};
use crate::petri::replay;
use crate::seed::{mix, stream_rng};
use crate::Timestamp;

/// Key separating the neighbor-selection stream from the simulation streams.
const KNN_STREAM_KEY: u64 = 0x006b_6e6e;

/// Serialized by its display name, e.g. `gdtspn_knn` or `knn_average_10`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum PredictionMethod {
    GdtspnKnn,
    Gdtspn,
    Average,
    KnnAverage(usize),
}

impl PredictionMethod {
    /// The five predictors of the evaluation: kNN-GDT_SPN, GDT_SPN, Average,
    /// and the 10- and 100-neighbor averages.
    pub fn all() -> Vec<Self> {
        vec![
            Self::GdtspnKnn,
            Self::Gdtspn,
            Self::Average,
            Self::KnnAverage(10),
            Self::KnnAverage(100),
        ]
    }
}

impl fmt::Display for PredictionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::GdtspnKnn => f.write_str("gdtspn_knn"),
            Self::Gdtspn => f.write_str("gdtspn"),
            Self::Average => f.write_str("average"),
            Self::KnnAverage(k) => write!(f, "knn_average_{k}"),
        }
    }
}

impl FromStr for PredictionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gdtspn_knn" => Ok(Self::GdtspnKnn),
            "gdtspn" => Ok(Self::Gdtspn),
            "average" => Ok(Self::Average),
            _ => s
                .strip_prefix("knn_average_")
                .and_then(|k| k.parse().ok())
                .filter(|&k: &usize| k > 0)
                .map(Self::KnnAverage)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown method '{s}'"))),
        }
    }
}

impl From<PredictionMethod> for String {
    fn from(m: PredictionMethod) -> String {
        m.to_string()
    }
}

impl TryFrom<String> for PredictionMethod {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub matched_count: Option<usize>,
    pub random_fill_count: Option<usize>,
    pub completed_runs: Option<usize>,
    pub aborted_runs: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub remaining_s: f64,
    pub method: PredictionMethod,
    pub diagnostics: Diagnostics,
}

/// Discovers a net from `log` and enriches it with the same traces.
pub fn build_model(log: &EventLog) -> Result<GdtSpn> {
    let (_, net) = discover_net(log);
    enrich(&net, log.traces())
}

fn elapsed_ms(prefix: &Trace, t0: Timestamp) -> Result<i64> {
    if t0 < prefix.start() {
        return Err(Error::BeforeCaseStart {
            t0,
            start: prefix.start(),
        });
    }
    Ok(t0 - prefix.start())
}

fn simulate(
    model: &GdtSpn,
    prefix: &Trace,
    t0: Timestamp,
    cfg: &SimulationConfig,
    method: PredictionMethod,
    mut diagnostics: Diagnostics,
) -> Result<Prediction> {
    elapsed_ms(prefix, t0)?;
    let state = replay(model.net(), prefix.events(), prefix.start())?;
    let est = model.predict_remaining(&state, t0, cfg)?;
    diagnostics.completed_runs = Some(est.completed);
    diagnostics.aborted_runs = Some(est.aborted);
    Ok(Prediction {
        remaining_s: (est.mean_ms / 1000.0).max(0.0),
        method,
        diagnostics,
    })
}

fn neighbors(train: &EventLog, prefix: &Trace, k: usize, seed: u64) -> Result<NeighborSelection> {
    let mut rng = stream_rng(mix(seed, &[KNN_STREAM_KEY]), 0);
    select_neighbors(train, prefix, k, &mut rng)
}

fn neighbor_diagnostics(sel: &NeighborSelection) -> Diagnostics {
    Diagnostics {
        matched_count: Some(sel.matched_count),
        random_fill_count: Some(sel.random_fill_count),
        ..Diagnostics::default()
    }
}

/// Selects `k` neighbors, builds a model from them and simulates the rest of
/// the case from the replayed prefix.
pub fn predict_gdtspn_knn(
    train: &EventLog,
    prefix: &Trace,
    t0: Timestamp,
    k: usize,
    cfg: &SimulationConfig,
) -> Result<Prediction> {
    let sel = neighbors(train, prefix, k, cfg.seed)?;
    let model = build_model(&train.select(&sel.indices)?)?;
    simulate(
        &model,
        prefix,
        t0,
        cfg,
        PredictionMethod::GdtspnKnn,
        neighbor_diagnostics(&sel),
    )
}

/// Full-log model built on first use. A cache belongs to one training log.
#[derive(Debug, Default)]
pub struct ModelCache {
    model: OnceLock<GdtSpn>,
    build_lock: Mutex<()>,
    builds: AtomicUsize,
}

impl ModelCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get_or_build(&self, train: &EventLog) -> Result<&GdtSpn> {
        if let Some(m) = self.model.get() {
            return Ok(m);
        }
        let _guard = self.build_lock.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(m) = self.model.get() {
            return Ok(m);
        }
        let m = build_model(train)?;
        self.builds.fetch_add(1, Ordering::Relaxed);
        Ok(self.model.get_or_init(|| m))
    }

    /// How many times a model was discovered.
    pub fn builds(&self) -> usize {
        self.builds.load(Ordering::Relaxed)
    }
}

/// Simulates from the model discovered on the whole training log.
pub fn predict_gdtspn(
    train: &EventLog,
    prefix: &Trace,
    t0: Timestamp,
    cfg: &SimulationConfig,
    cache: &ModelCache,
) -> Result<Prediction> {
    let model = cache.get_or_build(train)?;
    simulate(
        model,
        prefix,
        t0,
        cfg,
        PredictionMethod::Gdtspn,
        Diagnostics::default(),
    )
}

fn mean_duration_ms(traces: impl ExactSizeIterator<Item = i64>) -> Result<f64> {
    let n = traces.len();
    if n == 0 {
        return Err(Error::EmptyLog);
    }
    let total: i128 = traces.map(i128::from).sum();
    Ok(total as f64 / n as f64)
}

fn remaining(mean_ms: f64, elapsed_ms: i64, subtract_elapsed: bool) -> f64 {
    let r = if subtract_elapsed {
        mean_ms - elapsed_ms as f64
    } else {
        mean_ms
    };
    (r / 1000.0).max(0.0)
}

/// Mean training case duration minus the elapsed time (floored at 0), or the
/// plain mean duration when `subtract_elapsed` is false.
pub fn benchmark_average(train: &EventLog, elapsed_ms: i64, subtract_elapsed: bool) -> Result<Prediction> {
    let mean = mean_duration_ms(train.traces().iter().map(Trace::duration_ms))?;
    Ok(Prediction {
        remaining_s: remaining(mean, elapsed_ms, subtract_elapsed),
        method: PredictionMethod::Average,
        diagnostics: Diagnostics::default(),
    })
}

/// Mean duration of the `k` nearest training cases minus the elapsed time.
pub fn benchmark_knn_average(
    train: &EventLog,
    prefix: &Trace,
    t0: Timestamp,
    k: usize,
    seed: u64,
    subtract_elapsed: bool,
) -> Result<Prediction> {
    let elapsed = elapsed_ms(prefix, t0)?;
    let sel = neighbors(train, prefix, k, seed)?;
    let mean = mean_duration_ms(sel.indices.iter().map(|&i| train.traces()[i].duration_ms()))?;
    Ok(Prediction {
        remaining_s: remaining(mean, elapsed, subtract_elapsed),
        method: PredictionMethod::KnnAverage(k),
        diagnostics: neighbor_diagnostics(&sel),
    })
}
