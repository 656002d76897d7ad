//! Remaining-time prediction for running process instances.
//!
//! A prediction selects the `k` training traces most similar to a running case
//! (times-to-occurrence feature vectors, same-route preference), discovers a
//! workflow net from them with the Inductive Miner, enriches that net into a
//! stochastic Petri net with normally distributed activity durations, and
//! averages Monte Carlo simulations started from the replayed state of the case.
//!
//! Module map:
//! - [`event_log`]: traces, XES/CSV ingestion, splits, prefixes, statistics
//! - [`petri`]: nets, markings, workflow-net checks, token replay, PNML/dot
//! - [`discovery`]: directly-follows graphs, Inductive Miner, tree-to-net
//! - [`gdtspn`]: duration distributions, enrichment, truncated sampling, simulation
//! - [`knn`]: featurization and neighbor selection
//! - [`predict`]: the prediction pipeline and benchmark predictors
//! - [`eval`]: the periodic evaluation protocol and reports
//! - [`synth`]: synthetic process models and logs

pub mod discovery;
pub mod error;
pub mod eval;
pub mod event_log;
pub mod gdtspn;
pub mod knn;
pub mod petri;
pub mod predict;
pub mod seed;
pub mod synth;

pub use discovery::{build_dfg, inductive_miner, tree_to_petri, DirectlyFollowsGraph, ProcessTree};
pub use error::{Error, Result};
pub use eval::{evaluate_with, run_experiment, ExperimentConfig, IterationMetrics, Method};

pub use event_log::{Event, EventLog, LogStats, Trace, Vocabulary};
pub use gdtspn::{DurationDistribution, GdtSpn, SimulationConfig};
pub use knn::{select_neighbors, FeatureVector, NeighborSelection};
pub use petri::{Marking, PetriNet, ReplayState};
pub use predict::{Prediction, PredictionMethod};

/// Milliseconds since the Unix epoch.
pub type Timestamp = i64;

/// Convert a millisecond quantity to seconds.
pub fn ms_to_secs(ms: f64) -> f64 {
    ms / 1000.0
}
