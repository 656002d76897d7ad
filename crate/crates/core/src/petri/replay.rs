//! Token replay with token arrival times.
//!
//! Each token carries the time it was produced. Firing a transition consumes
//! the oldest token of every input place; the transition was enabled at the
//! latest of the consumed arrival times. Silent transitions fire at their
//! enabling time, labeled transitions at the timestamp of their event.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::{Marking, PetriNet, TransitionId};
use crate::error::{Error, Result};
use crate::event_log::{Event, Trace};
use crate::Timestamp;

const SILENT_SEARCH_LIMIT: usize = 50_000;

/// State of a net after replaying a (partial) trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayState {
    pub marking: Marking,
    /// Arrival times per place, ascending; `token_times[p].len() == marking.tokens(p)`.
    pub token_times: Vec<Vec<Timestamp>>,
    /// Enabling time of every timed transition that has all input tokens
    /// (priorities ignored).
    pub enabling_time: BTreeMap<TransitionId, Timestamp>,
    pub last_event_time: Timestamp,
}

impl ReplayState {
    /// The initial marking with its token(s) stamped at `start`.
    pub fn initial(net: &PetriNet, start: Timestamp) -> Self {
        let marking = net.initial_marking().clone();
        let token_times = marking
            .counts()
            .iter()
            .map(|&c| vec![start; c as usize])
            .collect();
        let mut s = Self {
            marking,
            token_times,
            enabling_time: BTreeMap::new(),
            last_event_time: start,
        };
        s.refresh_enabling(net);
        s
    }

    /// Enabling time of `t` given the current tokens, if enabled.
    pub fn enabling_time_of(&self, net: &PetriNet, t: TransitionId) -> Option<Timestamp> {
        net.preset(t)
            .iter()
            .map(|&p| self.token_times[p].first().copied())
            .try_fold(Timestamp::MIN, |acc, x| x.map(|x| acc.max(x)))
    }

    fn refresh_enabling(&mut self, net: &PetriNet) {
        self.enabling_time = (0..net.transition_count())
            .filter(|&t| !net.is_silent(t))
            .filter_map(|t| self.enabling_time_of(net, t).map(|e| (t, e)))
            .collect();
    }

    /// Fires `t`; `at` overrides the firing time (labeled transitions).
    /// Returns the enabling time.
    fn fire(&mut self, net: &PetriNet, t: TransitionId, at: Option<Timestamp>) -> Result<Timestamp> {
        let enabled_at = self.enabling_time_of(net, t).ok_or(Error::NotEnabled(t))?;
        let fired_at = at.unwrap_or(enabled_at);
        self.marking = net.fire(&self.marking, t)?;
        for &p in net.preset(t) {
            self.token_times[p].remove(0);
        }
        for &p in net.postset(t) {
            let times = &mut self.token_times[p];
            let pos = times.partition_point(|&x| x <= fired_at);
            times.insert(pos, fired_at);
        }
        Ok(enabled_at)
    }
}

/// One transition firing observed during replay.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Firing {
    pub transition: TransitionId,
    pub enabled_at: Timestamp,
    pub fired_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayTrace {
    pub state: ReplayState,
    pub firings: Vec<Firing>,
}

/// Replays `events` from the initial marking (tokens stamped at `start`).
pub fn replay(net: &PetriNet, events: &[Event], start: Timestamp) -> Result<ReplayState> {
    run(net, events, start, false).map(|r| r.state)
}

/// Replays a complete trace and then fires silent transitions until the final
/// marking is reached.
pub fn replay_complete(net: &PetriNet, trace: &Trace) -> Result<ReplayTrace> {
    run(net, trace.events(), trace.start(), true)
}

fn run(net: &PetriNet, events: &[Event], start: Timestamp, complete: bool) -> Result<ReplayTrace> {
    let mut state = ReplayState::initial(net, start);
    let mut firings = Vec::new();
    let mut fire = |state: &mut ReplayState, t: TransitionId, at: Option<Timestamp>| -> Result<()> {
        let enabled_at = state.fire(net, t, at)?;
        firings.push(Firing {
            transition: t,
            enabled_at,
            fired_at: at.unwrap_or(enabled_at),
        });
        Ok(())
    };

    for (i, ev) in events.iter().enumerate() {
        let fail = |reason: &str| Error::Replay {
            event_index: i,
            activity: ev.activity.clone(),
            reason: reason.to_string(),
        };
        let target = net
            .transition_by_label(&ev.activity)
            .ok_or_else(|| fail("label not in net"))?;
        if !net.is_enabled(&state.marking, target) {
            let path = silent_path(net, &state.marking, |m| net.is_enabled(m, target))
                .ok_or_else(|| fail("no silent sequence enables the transition"))?;
            for t in path {
                fire(&mut state, t, None)?;
            }
        }
        fire(&mut state, target, Some(ev.timestamp))?;
        state.last_event_time = ev.timestamp;
    }

    if complete && !net.is_final(&state.marking) {
        let path = silent_path(net, &state.marking, |m| net.is_final(m)).ok_or_else(|| {
            Error::Replay {
                event_index: events.len(),
                activity: String::new(),
                reason: "final marking not reachable by silent transitions".into(),
            }
        })?;
        for t in path {
            fire(&mut state, t, None)?;
        }
    }
    state.refresh_enabling(net);
    Ok(ReplayTrace { state, firings })
}

/// Shortest sequence of silent firings from `from` to a marking satisfying
/// `goal`; ties go to the lowest transition index.
fn silent_path(
    net: &PetriNet,
    from: &Marking,
    goal: impl Fn(&Marking) -> bool,
) -> Option<Vec<TransitionId>> {
    if goal(from) {
        return Some(Vec::new());
    }
    let silent: Vec<TransitionId> = (0..net.transition_count())
        .filter(|&t| net.is_silent(t))
        .collect();
    let mut parent: HashMap<Marking, Option<(Marking, TransitionId)>> = HashMap::new();
    parent.insert(from.clone(), None);
    let mut queue = VecDeque::from([from.clone()]);
    while let Some(m) = queue.pop_front() {
        for &t in &silent {
            if !net.is_enabled(&m, t) {
                continue;
            }
            let next = net.fire(&m, t).ok()?;
            if parent.contains_key(&next) {
                continue;
            }
            parent.insert(next.clone(), Some((m.clone(), t)));
            if goal(&next) {
                let mut path = Vec::new();
                let mut cur = next;
                while let Some(Some((prev, t))) = parent.get(&cur) {
                    path.push(*t);
                    cur = prev.clone();
                }
                path.reverse();
                return Some(path);
            }
            if parent.len() >= SILENT_SEARCH_LIMIT {
                return None;
            }
            queue.push_back(next);
        }
    }
    None
}
