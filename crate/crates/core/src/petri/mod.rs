//! Place/transition nets with unit arc weights.
//!
//! Labeled transitions are timed, unlabeled (silent) transitions are
//! immediate and take priority over timed ones.

mod dot;
mod pnml;
mod replay;
mod validate;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dot::to_dot;
pub use pnml::{read_pnml, write_pnml, PnmlAnnotations};
pub use replay::{replay, replay_complete, Firing, ReplayState, ReplayTrace};
pub use validate::{SoundnessCheck, DEFAULT_STATE_BOUND};

pub type PlaceId = usize;
pub type TransitionId = usize;

/// Token counts per place.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Marking(Vec<u32>);

impl Marking {
    pub fn empty(places: usize) -> Self {
        Self(vec![0; places])
    }

    pub fn from_counts(counts: Vec<u32>) -> Self {
        Self(counts)
    }

    pub fn with_token(places: usize, place: PlaceId) -> Self {
        let mut m = Self::empty(places);
        m.0[place] = 1;
        m
    }

    pub fn tokens(&self, place: PlaceId) -> u32 {
        self.0[place]
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&c| u64::from(c)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// Whether every place holds at least as many tokens as in `other`.
    pub fn covers(&self, other: &Marking) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub name: String,
    /// Activity label; `None` for silent transitions.
    pub label: Option<String>,
}

impl Transition {
    pub fn is_silent(&self) -> bool {
        self.label.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PetriNet {
    places: Vec<String>,
    transitions: Vec<Transition>,
    preset: Vec<Vec<PlaceId>>,
    postset: Vec<Vec<PlaceId>>,
    initial: Marking,
    final_marking: Marking,
    by_label: HashMap<String, TransitionId>,
}

/// Incremental construction of a [`PetriNet`].
#[derive(Debug, Default, Clone)]
pub struct NetBuilder {
    places: Vec<String>,
    transitions: Vec<Transition>,
    preset: Vec<Vec<PlaceId>>,
    postset: Vec<Vec<PlaceId>>,
}

impl NetBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn place(&mut self, name: impl Into<String>) -> PlaceId {
        self.places.push(name.into());
        self.places.len() - 1
    }

    pub fn transition(&mut self, name: impl Into<String>, label: Option<&str>) -> TransitionId {
        self.transitions.push(Transition {
            name: name.into(),
            label: label.map(str::to_string),
        });
        self.preset.push(Vec::new());
        self.postset.push(Vec::new());
        self.transitions.len() - 1
    }

    /// Arc place → transition.
    pub fn input(&mut self, place: PlaceId, t: TransitionId) -> &mut Self {
        self.preset[t].push(place);
        self
    }

    /// Arc transition → place.
    pub fn output(&mut self, t: TransitionId, place: PlaceId) -> &mut Self {
        self.postset[t].push(place);
        self
    }

    pub fn place_count(&self) -> usize {
        self.places.len()
    }

    pub fn build(self, initial: Marking, final_marking: Marking) -> Result<PetriNet> {
        let n = self.places.len();
        if initial.0.len() != n || final_marking.0.len() != n {
            return Err(Error::InvalidNet("marking length differs from place count".into()));
        }
        let mut by_label = HashMap::new();
        for (i, t) in self.transitions.iter().enumerate() {
            if let Some(label) = &t.label {
                if by_label.insert(label.clone(), i).is_some() {
                    return Err(Error::InvalidNet(format!("duplicate label '{label}'")));
                }
            }
        }
        for (t, arcs) in self.preset.iter().chain(&self.postset).enumerate() {
            let mut sorted = arcs.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidNet(format!(
                    "duplicate arc on transition {}",
                    t % self.transitions.len().max(1)
                )));
            }
            if sorted.iter().any(|&p| p >= n) {
                return Err(Error::InvalidNet("arc to unknown place".into()));
            }
        }
        Ok(PetriNet {
            places: self.places,
            transitions: self.transitions,
            preset: self.preset,
            postset: self.postset,
            initial,
            final_marking,
            by_label,
        })
    }
}

impl PetriNet {
    pub fn place_count(&self) -> usize {
        self.places.len()
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn place_name(&self, p: PlaceId) -> &str {
        &self.places[p]
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn transition(&self, t: TransitionId) -> &Transition {
        &self.transitions[t]
    }

    pub fn is_silent(&self, t: TransitionId) -> bool {
        self.transitions[t].is_silent()
    }

    pub fn preset(&self, t: TransitionId) -> &[PlaceId] {
        &self.preset[t]
    }

    pub fn postset(&self, t: TransitionId) -> &[PlaceId] {
        &self.postset[t]
    }

    pub fn initial_marking(&self) -> &Marking {
        &self.initial
    }

    pub fn final_marking(&self) -> &Marking {
        &self.final_marking
    }

    pub fn transition_by_label(&self, label: &str) -> Option<TransitionId> {
        self.by_label.get(label).copied()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.transitions.iter().filter_map(|t| t.label.as_deref())
    }

    /// Whether `t` has a token on each input place, ignoring priorities.
    pub fn is_enabled(&self, m: &Marking, t: TransitionId) -> bool {
        self.preset[t].iter().all(|&p| m.0[p] >= 1)
    }

    /// All transitions with sufficient input tokens, ignoring priorities.
    pub fn enabled_unprioritized(&self, m: &Marking) -> Vec<TransitionId> {
        (0..self.transitions.len())
            .filter(|&t| self.is_enabled(m, t))
            .collect()
    }

    /// Enabled transitions under priorities: when any immediate transition is
    /// enabled, only the immediate ones are returned.
    pub fn enabled(&self, m: &Marking) -> Vec<TransitionId> {
        let all = self.enabled_unprioritized(m);
        if all.iter().any(|&t| self.is_silent(t)) {
            all.into_iter().filter(|&t| self.is_silent(t)).collect()
        } else {
            all
        }
    }

    pub fn fire(&self, m: &Marking, t: TransitionId) -> Result<Marking> {
        if t >= self.transitions.len() || !self.is_enabled(m, t) {
            return Err(Error::NotEnabled(t));
        }
        let mut next = m.clone();
        for &p in &self.preset[t] {
            next.0[p] -= 1;
        }
        for &p in &self.postset[t] {
            next.0[p] += 1;
        }
        Ok(next)
    }

    pub fn is_final(&self, m: &Marking) -> bool {
        *m == self.final_marking
    }

    pub fn sources(&self) -> Vec<PlaceId> {
        let mut has_input = vec![false; self.places.len()];
        for post in &self.postset {
            for &p in post {
                has_input[p] = true;
            }
        }
        (0..self.places.len()).filter(|&p| !has_input[p]).collect()
    }

    pub fn sinks(&self) -> Vec<PlaceId> {
        let mut has_output = vec![false; self.places.len()];
        for pre in &self.preset {
            for &p in pre {
                has_output[p] = true;
            }
        }
        (0..self.places.len()).filter(|&p| !has_output[p]).collect()
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// source → A → p → B → sink
    pub fn sequence_ab() -> PetriNet {
        let mut b = NetBuilder::new();
        let (i, p, o) = (b.place("i"), b.place("p"), b.place("o"));
        let a = b.transition("A", Some("A"));
        let bb = b.transition("B", Some("B"));
        b.input(i, a).output(a, p).input(p, bb).output(bb, o);
        b.build(Marking::with_token(3, i), Marking::with_token(3, o))
            .unwrap()
    }

    /// A, then a silent choice into B or C, then end.
    pub fn xor_abc() -> PetriNet {
        let mut b = NetBuilder::new();
        let (i, p, qb, qc, o) = (
            b.place("i"),
            b.place("p"),
            b.place("qb"),
            b.place("qc"),
            b.place("o"),
        );
        let a = b.transition("A", Some("A"));
        let tb = b.transition("tau_b", None);
        let tc = b.transition("tau_c", None);
        let bt = b.transition("B", Some("B"));
        let ct = b.transition("C", Some("C"));
        b.input(i, a).output(a, p);
        b.input(p, tb).output(tb, qb).input(qb, bt).output(bt, o);
        b.input(p, tc).output(tc, qc).input(qc, ct).output(ct, o);
        b.build(Marking::with_token(5, i), Marking::with_token(5, o))
            .unwrap()
    }

    /// Silent split into A ∥ B, silent join.
    pub fn parallel_ab() -> PetriNet {
        let mut b = NetBuilder::new();
        let i = b.place("i");
        let (pa, pb, qa, qb) = (b.place("pa"), b.place("pb"), b.place("qa"), b.place("qb"));
        let o = b.place("o");
        let split = b.transition("split", None);
        let a = b.transition("A", Some("A"));
        let bt = b.transition("B", Some("B"));
        let join = b.transition("join", None);
        b.input(i, split).output(split, pa).output(split, pb);
        b.input(pa, a).output(a, qa).input(pb, bt).output(bt, qb);
        b.input(qa, join).input(qb, join).output(join, o);
        b.build(Marking::with_token(6, i), Marking::with_token(6, o))
            .unwrap()
    }
}
