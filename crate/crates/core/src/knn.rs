//! Times-to-occurrence features and nearest-neighbor selection.
//!
//! A trace is encoded as, per vocabulary activity, the time from the trace
//! start to the last occurrence of that activity (`-1` when absent). Training
//! traces that do not follow the running case's route so far are replaced by a
//! penalty vector holding the largest time-to-occurrence seen in training.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event_log::{EventLog, Trace, Vocabulary};

pub const DEFAULT_K: usize = 100;

/// Marker for an activity that does not occur.
pub const ABSENT: i64 = -1;

/// Times-to-occurrence in milliseconds, indexed by vocabulary position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureVector(pub Vec<i64>);

impl FeatureVector {
    pub fn values(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn times_to_occurrence(trace: &Trace, voc: &Vocabulary) -> FeatureVector {
    let mut v = vec![ABSENT; voc.len()];
    let start = trace.start();
    for e in trace.events() {
        if let Some(i) = voc.position(&e.activity) {
            // events are time ordered, so the last write wins
            v[i] = e.timestamp - start;
        }
    }
    FeatureVector(v)
}

/// True iff the prefix's activity sequence is a prefix of `train`'s.
pub fn same_route(train: &Trace, prefix: &Trace) -> bool {
    prefix.len() <= train.len()
        && prefix
            .events()
            .iter()
            .zip(train.events())
            .all(|(p, t)| p.activity == t.activity)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidates {
    pub vectors: Vec<FeatureVector>,
    pub penalized: Vec<bool>,
    /// Largest non-negative time-to-occurrence over all training vectors.
    pub max_tto: i64,
}

pub fn build_candidates(train: &EventLog, prefix: &Trace, voc: &Vocabulary) -> Candidates {
    let raw: Vec<FeatureVector> = train
        .traces()
        .iter()
        .map(|t| times_to_occurrence(t, voc))
        .collect();
    let max_tto = raw
        .iter()
        .flat_map(|v| v.0.iter().copied())
        .max()
        .unwrap_or(0)
        .max(0);
    let penalized: Vec<bool> = train.traces().iter().map(|t| !same_route(t, prefix)).collect();
    let vectors = raw
        .into_iter()
        .zip(&penalized)
        .map(|(v, &pen)| {
            if pen {
                FeatureVector(vec![max_tto; voc.len()])
            } else {
                v
            }
        })
        .collect();
    Candidates {
        vectors,
        penalized,
        max_tto,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborSelection {
    /// Training-trace indices: same-route traces by ascending distance (ties by
    /// index), then random fills by ascending index.
    pub indices: Vec<usize>,
    pub distances: Vec<f64>,
    pub matched_count: usize,
    pub random_fill_count: usize,
}

/// Normalized Euclidean distance over the dimensions the query has observed.
/// Values are scaled by `max_tto` (min 0); the query is clamped into [0, 1].
pub fn distance(query: &FeatureVector, candidate: &FeatureVector, max_tto: i64) -> f64 {
    let scale = |x: i64| {
        if max_tto == 0 {
            0.0
        } else {
            (x as f64 / max_tto as f64).clamp(0.0, 1.0)
        }
    };
    query
        .0
        .iter()
        .zip(&candidate.0)
        .filter(|(q, _)| **q >= 0)
        .map(|(&q, &c)| (scale(q) - scale(c)).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Picks `k` training traces for `prefix`. All same-route traces are preferred
/// (nearest first); if there are fewer than `k`, the rest is drawn uniformly
/// without replacement from the other traces.
pub fn select_neighbors<R: Rng + ?Sized>(
    train: &EventLog,
    prefix: &Trace,
    k: usize,
    rng: &mut R,
) -> Result<NeighborSelection> {
    if k == 0 || k > train.len() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} must be between 1 and the training size {}",
            train.len()
        )));
    }
    let voc = train.vocabulary();
    let cand = build_candidates(train, prefix, voc);
    let query = times_to_occurrence(prefix, voc);
    let dist = |i: usize| distance(&query, &cand.vectors[i], cand.max_tto);

    let (matched, penalized): (Vec<usize>, Vec<usize>) =
        (0..train.len()).partition(|&i| !cand.penalized[i]);
    let mut ranked: Vec<(f64, usize)> = matched.iter().map(|&i| (dist(i), i)).collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    ranked.truncate(k);
    let matched_count = ranked.len();

    let fill = k - matched_count;
    let mut fills: Vec<usize> = index::sample(rng, penalized.len(), fill)
        .into_iter()
        .map(|j| penalized[j])
        .collect();
    fills.sort_unstable();

    let mut indices: Vec<usize> = ranked.iter().map(|&(_, i)| i).collect();
    let mut distances: Vec<f64> = ranked.iter().map(|&(d, _)| d).collect();
    for i in fills {
        indices.push(i);
        distances.push(dist(i));
    }
    Ok(NeighborSelection {
        indices,
        distances,
        matched_count,
        random_fill_count: fill,
    })
}
