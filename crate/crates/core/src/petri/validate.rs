use std::collections::{HashMap, VecDeque};

use super::{Marking, PetriNet};
use crate::error::{Error, Result};

/// Upper bound on explored markings for the soundness check.
pub const DEFAULT_STATE_BOUND: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SoundnessCheck {
    Skip,
    Bounded(usize),
}

impl Default for SoundnessCheck {
    fn default() -> Self {
        SoundnessCheck::Bounded(DEFAULT_STATE_BOUND)
    }
}

impl PetriNet {
    /// Checks the workflow-net shape and, unless skipped, soundness by
    /// explicit reachability.
    pub fn validate_workflow_net(&self, check: SoundnessCheck) -> Result<()> {
        self.check_shape()?;
        if let SoundnessCheck::Bounded(bound) = check {
            self.check_soundness(bound)?;
        }
        Ok(())
    }

    fn check_shape(&self) -> Result<()> {
        let sources = self.sources();
        let sinks = self.sinks();
        let [source] = sources[..] else {
            return Err(Error::WorkflowShape(format!(
                "expected one source place, found {}",
                sources.len()
            )));
        };
        let [sink] = sinks[..] else {
            return Err(Error::WorkflowShape(format!(
                "expected one sink place, found {}",
                sinks.len()
            )));
        };
        let n = self.place_count();
        if *self.initial_marking() != Marking::with_token(n, source) {
            return Err(Error::WorkflowShape(
                "initial marking must be one token on the source place".into(),
            ));
        }
        if *self.final_marking() != Marking::with_token(n, sink) {
            return Err(Error::WorkflowShape(
                "final marking must be one token on the sink place".into(),
            ));
        }
        for t in 0..self.transition_count() {
            if self.preset(t).is_empty() || self.postset(t).is_empty() {
                return Err(Error::WorkflowShape(format!(
                    "transition '{}' lacks input or output places",
                    self.transition(t).name
                )));
            }
        }

        // every node on a path source → sink: forward from source, backward from sink
        let forward = self.place_reach(source, false);
        let backward = self.place_reach(sink, true);
        if let Some(p) = (0..n).find(|&p| !forward[p] || !backward[p]) {
            return Err(Error::WorkflowShape(format!(
                "place '{}' is not on a path from source to sink",
                self.place_name(p)
            )));
        }
        Ok(())
    }

    /// Places reachable through transitions (forward or backward).
    fn place_reach(&self, start: usize, backward: bool) -> Vec<bool> {
        let mut seen = vec![false; self.place_count()];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(p) = queue.pop_front() {
            for t in 0..self.transition_count() {
                let (from, to) = if backward {
                    (self.postset(t), self.preset(t))
                } else {
                    (self.preset(t), self.postset(t))
                };
                if from.contains(&p) {
                    for &q in to {
                        if !seen[q] {
                            seen[q] = true;
                            queue.push_back(q);
                        }
                    }
                }
            }
        }
        seen
    }

    fn check_soundness(&self, bound: usize) -> Result<()> {
        let mut index: HashMap<Marking, usize> = HashMap::new();
        let mut states: Vec<Marking> = Vec::new();
        let mut reverse: Vec<Vec<usize>> = Vec::new();
        let mut fired = vec![false; self.transition_count()];
        let final_m = self.final_marking();

        index.insert(self.initial_marking().clone(), 0);
        states.push(self.initial_marking().clone());
        reverse.push(Vec::new());
        let mut next = 0;
        while next < states.len() {
            let m = states[next].clone();
            if m.covers(final_m) && m != *final_m {
                return Err(Error::Unsound(
                    "a reachable marking strictly covers the final marking".into(),
                ));
            }
            for t in self.enabled_unprioritized(&m) {
                fired[t] = true;
                let succ = self.fire(&m, t)?;
                let id = match index.get(&succ) {
                    Some(&id) => id,
                    None => {
                        if states.len() >= bound {
                            return Err(Error::Unsound(format!(
                                "state space exceeds {bound} markings"
                            )));
                        }
                        let id = states.len();
                        index.insert(succ.clone(), id);
                        states.push(succ);
                        reverse.push(Vec::new());
                        id
                    }
                };
                reverse[id].push(next);
            }
            next += 1;
        }

        if let Some(t) = fired.iter().position(|f| !f) {
            return Err(Error::Unsound(format!(
                "transition '{}' is dead",
                self.transition(t).name
            )));
        }
        let Some(&final_id) = index.get(final_m) else {
            return Err(Error::Unsound("final marking is unreachable".into()));
        };
        let mut can_finish = vec![false; states.len()];
        can_finish[final_id] = true;
        let mut queue = VecDeque::from([final_id]);
        while let Some(s) = queue.pop_front() {
            for &p in &reverse[s] {
                if !can_finish[p] {
                    can_finish[p] = true;
                    queue.push_back(p);
                }
            }
        }
        if can_finish.iter().any(|c| !c) {
            return Err(Error::Unsound(
                "some reachable marking cannot complete".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::NetBuilder;
    use super::*;

    #[test]
    fn sequence_is_valid() {
        sequence_ab()
            .validate_workflow_net(SoundnessCheck::default())
            .unwrap();
        xor_abc().validate_workflow_net(SoundnessCheck::default()).unwrap();
        parallel_ab()
            .validate_workflow_net(SoundnessCheck::default())
            .unwrap();
    }

    #[test]
    fn two_sources_is_shape_error() {
        let mut b = NetBuilder::new();
        let (i1, i2, o) = (b.place("i1"), b.place("i2"), b.place("o"));
        let t = b.transition("t", Some("T"));
        b.input(i1, t).input(i2, t).output(t, o);
        let net = b
            .build(Marking::from_counts(vec![1, 1, 0]), Marking::with_token(3, o))
            .unwrap();
        assert!(matches!(
            net.validate_workflow_net(SoundnessCheck::Skip),
            Err(Error::WorkflowShape(_))
        ));
    }

    #[test]
    fn dead_transition_is_unsound() {
        // D needs a token on p2, which only D itself produces
        let mut b = NetBuilder::new();
        let (i, p1, p2, o) = (b.place("i"), b.place("p1"), b.place("p2"), b.place("o"));
        let a = b.transition("A", Some("A"));
        let c = b.transition("C", Some("C"));
        let d = b.transition("D", Some("D"));
        b.input(i, a).output(a, p1);
        b.input(p1, c).output(c, o);
        b.input(p1, d).input(p2, d).output(d, o).output(d, p2);
        let net = b
            .build(Marking::with_token(4, i), Marking::with_token(4, o))
            .unwrap();
        assert!(net.validate_workflow_net(SoundnessCheck::default()).is_err());

        let mut b = NetBuilder::new();
        let (i, p, q, o) = (b.place("i"), b.place("p"), b.place("q"), b.place("o"));
        let a = b.transition("A", Some("A"));
        let bb = b.transition("B", Some("B"));
        let c = b.transition("C", Some("C"));
        let d = b.transition("D", Some("D"));
        // A: i -> p ; B: i -> q ; C: p -> o ; D: p,q -> o (never both p and q)
        b.input(i, a).output(a, p);
        b.input(i, bb).output(bb, q);
        b.input(p, c).output(c, o);
        b.input(p, d).input(q, d).output(d, o);
        let net = b
            .build(Marking::with_token(4, i), Marking::with_token(4, o))
            .unwrap();
        net.validate_workflow_net(SoundnessCheck::Skip).unwrap();
        match net.validate_workflow_net(SoundnessCheck::default()) {
            Err(Error::Unsound(msg)) => assert!(msg.contains("dead") || msg.contains("complete")),
            other => panic!("expected unsound, got {other:?}"),
        }
    }

    #[test]
    fn improper_completion_is_unsound() {
        // split without join: two tokens reach the sink
        let mut b = NetBuilder::new();
        let (i, p, o) = (b.place("i"), b.place("p"), b.place("o"));
        let s = b.transition("s", None);
        let a = b.transition("A", Some("A"));
        b.input(i, s).output(s, p).output(s, o);
        b.input(p, a).output(a, o);
        let net = b
            .build(Marking::with_token(3, i), Marking::with_token(3, o))
            .unwrap();
        assert!(matches!(
            net.validate_workflow_net(SoundnessCheck::default()),
            Err(Error::Unsound(_))
        ));
    }
}
