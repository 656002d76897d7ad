//! Monte Carlo race simulation.
//!
//! Times inside a run are f64 milliseconds relative to the prediction time.
//! Every token carries the time it was produced; a transition's enabling time
//! is the latest of the oldest tokens in its input places.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{GdtSpn, Timing};
use crate::error::{Error, Result};
use crate::event_log::{Event, Trace};
use crate::petri::{ReplayState, TransitionId};
use crate::seed::stream_rng;
use crate::Timestamp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub n_runs: usize,
    pub max_firings_per_run: usize,
    pub seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            n_runs: 500,
            max_firings_per_run: 10_000,
            seed: 0,
        }
    }
}

impl SimulationConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemainingEstimate {
    /// Mean remaining time over completed runs, in milliseconds.
    pub mean_ms: f64,
    pub completed: usize,
    pub aborted: usize,
}

struct Run<'a, R> {
    model: &'a GdtSpn,
    tokens: Vec<Vec<f64>>,
    /// (enabling time, completion time) of scheduled timed transitions.
    schedule: Vec<Option<(f64, f64)>>,
    clock: f64,
    rng: &'a mut R,
}

impl<R: Rng> Run<'_, R> {
    fn enabling(&self, t: TransitionId) -> Option<f64> {
        self.model
            .net
            .preset(t)
            .iter()
            .map(|&p| self.tokens[p].first().copied())
            .try_fold(f64::NEG_INFINITY, |acc, x| x.map(|x| acc.max(x)))
    }

    fn is_final(&self) -> bool {
        let f = self.model.net.final_marking().counts();
        self.tokens.iter().zip(f).all(|(v, &c)| v.len() == c as usize)
    }

    fn fire(&mut self, t: TransitionId, at: f64) {
        let net = &self.model.net;
        for &p in net.preset(t) {
            self.tokens[p].remove(0);
        }
        for &p in net.postset(t) {
            let v = &mut self.tokens[p];
            let pos = v.partition_point(|&x| x <= at);
            v.insert(pos, at);
        }
    }

    fn pick_immediate(&mut self, candidates: &[(TransitionId, f64)]) -> (TransitionId, f64) {
        if candidates.len() == 1 {
            return candidates[0];
        }
        let weights: Vec<f64> = candidates
            .iter()
            .map(|&(t, _)| match self.model.timing[t] {
                Timing::Immediate { weight } => weight,
                Timing::Timed(_) => 0.0,
            })
            .collect();
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return candidates[self.rng.random_range(0..candidates.len())];
        }
        let mut r = self.rng.random::<f64>() * total;
        for (c, w) in candidates.iter().zip(&weights) {
            if r < *w {
                return *c;
            }
            r -= w;
        }
        *candidates.last().expect("non-empty")
    }

    /// Runs to the final marking; returns the labeled firings and the final
    /// clock, or `None` on deadlock or when the firing budget is exhausted.
    fn run(&mut self, max_firings: usize, mut on_fire: impl FnMut(TransitionId, f64)) -> Option<f64> {
        let n = self.model.net.transition_count();
        let mut firings = 0usize;
        let mut immediates = Vec::new();
        let mut timed = Vec::new();
        loop {
            if self.is_final() {
                return Some(self.clock);
            }
            immediates.clear();
            timed.clear();
            for t in 0..n {
                match self.enabling(t) {
                    None => self.schedule[t] = None,
                    Some(e) if self.model.net.is_silent(t) => immediates.push((t, e)),
                    Some(e) => timed.push((t, e)),
                }
            }
            if immediates.is_empty() && timed.is_empty() {
                return None;
            }
            firings += 1;
            if firings > max_firings {
                return None;
            }
            if !immediates.is_empty() {
                let (t, e) = self.pick_immediate(&immediates);
                self.fire(t, e);
                on_fire(t, e);
                continue;
            }
            let mut best: Option<(TransitionId, f64)> = None;
            for &(t, e) in &timed {
                let completion = match self.schedule[t] {
                    Some((se, c)) if se == e => c,
                    _ => {
                        let Timing::Timed(d) = &self.model.timing[t] else {
                            unreachable!("labeled transitions are timed")
                        };
                        let c = e + d.truncated_sample(self.clock - e, self.rng);
                        self.schedule[t] = Some((e, c));
                        c
                    }
                };
                if best.is_none_or(|(_, b)| completion < b) {
                    best = Some((t, completion));
                }
            }
            let (t, completion) = best.expect("some timed transition is enabled");
            self.clock = self.clock.max(completion);
            self.schedule[t] = None;
            let at = self.clock;
            self.fire(t, at);
            on_fire(t, at);
        }
    }
}

impl GdtSpn {
    /// One simulated remaining duration in milliseconds from `state` at `t0`,
    /// or `None` if the run deadlocked or hit the firing budget.
    pub fn simulate_once<R: Rng>(
        &self,
        state: &ReplayState,
        t0: Timestamp,
        max_firings: usize,
        rng: &mut R,
    ) -> Option<f64> {
        let tokens = state
            .token_times
            .iter()
            .map(|v| v.iter().map(|&x| (x - t0) as f64).collect())
            .collect();
        let mut run = Run {
            model: self,
            tokens,
            schedule: vec![None; self.net.transition_count()],
            clock: 0.0,
            rng,
        };
        run.run(max_firings, |_, _| {})
    }

    /// Mean of `cfg.n_runs` simulations. Run `i` uses stream `i` of
    /// `cfg.seed`, so the result does not depend on thread scheduling.
    pub fn predict_remaining(
        &self,
        state: &ReplayState,
        t0: Timestamp,
        cfg: &SimulationConfig,
    ) -> Result<RemainingEstimate> {
        if cfg.n_runs == 0 {
            return Err(Error::InvalidArgument("n_runs must be at least 1".into()));
        }
        let results: Vec<Option<f64>> = (0..cfg.n_runs)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream_rng(cfg.seed, i as u64);
                self.simulate_once(state, t0, cfg.max_firings_per_run, &mut rng)
            })
            .collect();
        let completed: Vec<f64> = results.iter().flatten().copied().collect();
        let aborted = cfg.n_runs - completed.len();
        if aborted * 2 > cfg.n_runs {
            return Err(Error::SimulationAborted {
                aborted,
                runs: cfg.n_runs,
            });
        }
        let mean_ms = completed.iter().sum::<f64>() / completed.len() as f64;
        Ok(RemainingEstimate {
            mean_ms,
            completed: completed.len(),
            aborted,
        })
    }

    /// Simulates a complete case from the initial marking starting at `start`.
    /// Event times are rounded to whole milliseconds.
    pub fn sample_trace<R: Rng>(
        &self,
        case_id: &str,
        start: Timestamp,
        max_firings: usize,
        rng: &mut R,
    ) -> Option<Trace> {
        let tokens = self
            .net
            .initial_marking()
            .counts()
            .iter()
            .map(|&c| vec![0.0; c as usize])
            .collect();
        let mut run = Run {
            model: self,
            tokens,
            schedule: vec![None; self.net.transition_count()],
            clock: 0.0,
            rng,
        };
        let mut events = Vec::new();
        let net = &self.net;
        run.run(max_firings, |t, at| {
            if let Some(label) = &net.transition(t).label {
                events.push((label.clone(), start + at.round() as Timestamp));
            }
        })?;
        let events = events
            .into_iter()
            .map(|(a, ts)| Event::new(a, ts))
            .collect::<Result<Vec<_>>>()
            .ok()?;
        if events.is_empty() {
            return None;
        }
        Trace::new(case_id, events).ok()
    }
}
