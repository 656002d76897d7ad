//! Synthetic process models and event logs.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::discovery::{tree_to_petri, ProcessTree};
use crate::error::{Error, Result};
use crate::event_log::{Event, EventLog, Trace};
use crate::gdtspn::{DurationDistribution, GdtSpn, Timing};
use crate::Timestamp;

const HOUR_MS: f64 = 3_600_000.0;
const MAX_FIRINGS: usize = 10_000;

/// Random block-structured tree over `1..=max_activities` distinct labels
/// (`a`, `b`, ...) with depth at most `max_depth` (a single leaf has depth 1).
pub fn random_tree<R: Rng + ?Sized>(rng: &mut R, max_depth: usize, max_activities: usize) -> ProcessTree {
    let max_activities = max_activities.clamp(1, 26);
    let n = rng.random_range(1..=max_activities);
    let mut labels: Vec<String> = (0..n).map(|i| ((b'a' + i as u8) as char).to_string()).collect();
    labels.shuffle(rng);
    grow(rng, &labels, max_depth.max(1))
}

fn grow<R: Rng + ?Sized>(rng: &mut R, labels: &[String], depth: usize) -> ProcessTree {
    if labels.len() == 1 && (depth == 1 || rng.random_bool(0.6)) {
        return ProcessTree::Activity(labels[0].clone());
    }
    if labels.len() == 1 {
        // a single activity under an operator: optional or repeated
        let leaf = ProcessTree::Activity(labels[0].clone());
        return if rng.random_bool(0.5) {
            ProcessTree::Xor(vec![leaf, ProcessTree::Silent])
        } else {
            ProcessTree::Loop(vec![leaf, ProcessTree::Silent])
        };
    }
    if depth == 1 {
        unreachable!("callers keep enough depth for several labels");
    }
    let op = rng.random_range(0..4);
    let max_parts = if op == 3 { 2 } else { labels.len().min(3) };
    let parts = if depth == 2 {
        // children must be leaves
        if op == 3 && labels.len() > 2 {
            return grow_flat(rng, labels);
        }
        labels.len()
    } else {
        rng.random_range(2..=max_parts.max(2))
    };
    let groups = split(rng, labels, parts);
    let children: Vec<ProcessTree> = groups.iter().map(|g| grow(rng, g, depth - 1)).collect();
    match op {
        0 => ProcessTree::Sequence(children),
        1 => {
            let mut c = children;
            if rng.random_bool(0.2) {
                c.push(ProcessTree::Silent);
            }
            ProcessTree::Xor(c)
        }
        2 => ProcessTree::Parallel(children),
        _ => ProcessTree::Loop(children),
    }
}

fn grow_flat<R: Rng + ?Sized>(rng: &mut R, labels: &[String]) -> ProcessTree {
    let leaves = labels.iter().map(|l| ProcessTree::Activity(l.clone())).collect();
    match rng.random_range(0..3) {
        0 => ProcessTree::Sequence(leaves),
        1 => ProcessTree::Xor(leaves),
        _ => ProcessTree::Parallel(leaves),
    }
}

/// Splits `labels` into `parts` non-empty contiguous groups.
fn split<R: Rng + ?Sized>(rng: &mut R, labels: &[String], parts: usize) -> Vec<Vec<String>> {
    let mut cuts: Vec<usize> = rand::seq::index::sample(rng, labels.len() - 1, parts - 1)
        .into_iter()
        .map(|c| c + 1)
        .collect();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(parts);
    let mut from = 0;
    for c in cuts.into_iter().chain([labels.len()]) {
        out.push(labels[from..c].to_vec());
        from = c;
    }
    out
}

/// Workflow net of `tree` with normal durations (means between 1 and 10
/// hours, coefficient of variation 0.2) and unit routing weights.
pub fn model_from_tree<R: Rng + ?Sized>(tree: &ProcessTree, rng: &mut R) -> Result<GdtSpn> {
    let net = tree_to_petri(tree);
    let timing = (0..net.transition_count())
        .map(|t| {
            if net.is_silent(t) {
                Ok(Timing::Immediate { weight: 1.0 })
            } else {
                let mean = rng.random_range(1.0..10.0) * HOUR_MS;
                DurationDistribution::normal(mean, 0.2 * mean).map(Timing::Timed)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    GdtSpn::new(net, timing)
}

/// Sequence net with constant durations; `gaps_ms[i]` is the time activity
/// `i` takes after its predecessor (the first one is ignored since a trace
/// starts at its first event).
pub fn deterministic_model(gaps_ms: &[i64]) -> Result<GdtSpn> {
    if gaps_ms.is_empty() {
        return Err(Error::InvalidArgument("at least one activity is needed".into()));
    }
    let tree = ProcessTree::sequence(
        (0..gaps_ms.len())
            .map(|i| ProcessTree::Activity(format!("step_{i}")))
            .collect(),
    );
    let net = tree_to_petri(&tree);
    let timing = (0..net.transition_count())
        .map(|t| {
            let label = net.transition(t).label.as_deref();
            match label.and_then(|l| l.strip_prefix("step_")).and_then(|i| i.parse::<usize>().ok()) {
                Some(i) => DurationDistribution::dirac(gaps_ms[i] as f64).map(Timing::Timed),
                None => Ok(Timing::Immediate { weight: 1.0 }),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    GdtSpn::new(net, timing)
}

/// Simulates `n_cases` cases; case `i` is named `{prefix}{i:05}` and starts at
/// `start + i·spacing_ms`. Runs that end without visible events are retried.
pub fn generate_log(
    model: &GdtSpn,
    n_cases: usize,
    start: Timestamp,
    spacing_ms: i64,
    case_prefix: &str,
    seed: u64,
) -> Result<EventLog> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut traces = Vec::with_capacity(n_cases);
    for i in 0..n_cases {
        let id = format!("{case_prefix}{i:05}");
        let case_start = start + i as i64 * spacing_ms;
        let trace = (0..1000)
            .find_map(|_| model.sample_trace(&id, case_start, MAX_FIRINGS, &mut rng))
            .ok_or_else(|| Error::InvalidArgument(format!("model produced no trace for case {id}")))?;
        traces.push(trace);
    }
    EventLog::new(traces)
}

/// Parameters of the two-variant generator. Both variants use the labels
/// A, B, C, E; variant 1 runs ⟨A, B, C, E⟩ with short activities, variant 2
/// ⟨A, C, B, E⟩ with long ones. Gaps are (mean, std) in hours.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoVariantConfig {
    pub variant_one_share: f64,
    pub variant_one_gaps_h: [(f64, f64); 3],
    pub variant_two_gaps_h: [(f64, f64); 3],
    pub spacing_ms: i64,
}

impl Default for TwoVariantConfig {
    fn default() -> Self {
        Self {
            variant_one_share: 0.6,
            variant_one_gaps_h: [(1.0, 0.2), (2.0, 0.4), (3.0, 0.6)],
            variant_two_gaps_h: [(5.0, 1.0), (20.0, 4.0), (10.0, 2.0)],
            spacing_ms: 600_000,
        }
    }
}

/// Two-variant log; see [`TwoVariantConfig`]. Durations are normal samples
/// truncated at 0 and rounded to milliseconds.
pub fn two_variant_log(
    cfg: &TwoVariantConfig,
    n_cases: usize,
    start: Timestamp,
    case_prefix: &str,
    seed: u64,
) -> Result<EventLog> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gaps = |g: &[(f64, f64); 3]| -> Result<Vec<DurationDistribution>> {
        g.iter()
            .map(|&(m, s)| DurationDistribution::normal(m * HOUR_MS, s * HOUR_MS))
            .collect()
    };
    let v1 = gaps(&cfg.variant_one_gaps_h)?;
    let v2 = gaps(&cfg.variant_two_gaps_h)?;
    let mut traces = Vec::with_capacity(n_cases);
    for i in 0..n_cases {
        let first = rng.random_bool(cfg.variant_one_share);
        let (order, durations) = if first {
            (["A", "B", "C", "E"], &v1)
        } else {
            (["A", "C", "B", "E"], &v2)
        };
        let mut t = start + i as i64 * cfg.spacing_ms;
        let mut events = vec![Event::new(order[0], t)?];
        for (label, d) in order[1..].iter().zip(durations) {
            t += d.truncated_sample(0.0, &mut rng).round() as i64;
            events.push(Event::new(*label, t)?);
        }
        traces.push(Trace::new(format!("{case_prefix}{i:05}"), events)?);
    }
    EventLog::new(traces)
}

/// Train and test logs from the two-variant generator. The test cases start
/// 100 hours after the last training case, so the pair is an out-of-time
/// split. The logs are drawn with seeds `seed` and `seed + 1`.
pub fn two_variant_train_test(
    cfg: &TwoVariantConfig,
    n_train: usize,
    n_test: usize,
    seed: u64,
) -> Result<(EventLog, EventLog)> {
    let train = two_variant_log(cfg, n_train, 0, "train", seed)?;
    let test_start = n_train as i64 * cfg.spacing_ms + 100 * HOUR_MS as i64;
    let test = two_variant_log(cfg, n_test, test_start, "test", seed.wrapping_add(1))?;
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discovery::inductive_miner;
    use crate::petri::{replay_complete, SoundnessCheck};

    #[test]
    fn random_trees_respect_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let t = random_tree(&mut rng, 3, 6);
            assert!(t.depth() <= 3, "{t}");
            let acts = t.activities();
            assert!(!acts.is_empty() && acts.len() <= 6);
            let mut uniq = acts.clone();
            uniq.sort_unstable();
            uniq.dedup();
            assert_eq!(uniq.len(), acts.len());
        }
    }

    #[test]
    fn generated_traces_belong_to_the_tree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let tree = random_tree(&mut rng, 3, 5);
            let model = model_from_tree(&tree, &mut rng).unwrap();
            let log = generate_log(&model, 20, 0, 1_000, "c", 1).unwrap();
            for t in log.traces() {
                assert!(replay_complete(model.net(), t).is_ok(), "{tree}");
            }
            let net = crate::discovery::tree_to_petri(&inductive_miner(&log));
            net.validate_workflow_net(SoundnessCheck::default()).unwrap();
        }
    }

    #[test]
    fn deterministic_log_is_constant() {
        let m = deterministic_model(&[0, 60_000, 30_000, 90_000]).unwrap();
        let log = generate_log(&m, 5, 1_000, 10_000, "d", 3).unwrap();
        for (i, t) in log.traces().iter().enumerate() {
            let times: Vec<i64> = t.events().iter().map(|e| e.timestamp - t.start()).collect();
            assert_eq!(times, vec![0, 60_000, 90_000, 180_000]);
            assert_eq!(t.start(), 1_000 + 10_000 * i as i64);
        }
    }

    #[test]
    fn two_variants_share_labels() {
        let log = two_variant_log(&TwoVariantConfig::default(), 400, 0, "v", 9).unwrap();
        let first = log
            .traces()
            .iter()
            .filter(|t| t.events()[1].activity == "B")
            .count();
        // binomial(400, 0.6): sd ≈ 9.8
        assert!((first as i64 - 240).abs() < 50, "{first}");
        assert_eq!(log.vocabulary().labels(), &["A", "B", "C", "E"]);
    }
}
