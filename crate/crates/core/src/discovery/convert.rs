//! Process tree to workflow net.
//!
//! Every non-silent branch of an exclusive choice and every loop exit/redo is
//! entered through its own silent transition, so all routing decisions are
//! made by weighted immediate transitions rather than by races between timed
//! activities.

use super::ProcessTree;
use crate::petri::{Marking, NetBuilder, PetriNet, PlaceId};

struct Builder {
    net: NetBuilder,
    silent: usize,
}

impl Builder {
    fn place(&mut self) -> PlaceId {
        let n = self.net.place_count();
        self.net.place(format!("p{n}"))
    }

    fn tau(&mut self, kind: &str, from: PlaceId, to: PlaceId) {
        let name = format!("tau_{kind}_{}", self.silent);
        self.silent += 1;
        let t = self.net.transition(name, None);
        self.net.input(from, t).output(t, to);
    }

    fn build(&mut self, node: &ProcessTree, entry: PlaceId, exit: PlaceId) {
        match node {
            ProcessTree::Activity(label) => {
                let t = self.net.transition(label.clone(), Some(label));
                self.net.input(entry, t).output(t, exit);
            }
            ProcessTree::Silent => self.tau("skip", entry, exit),
            ProcessTree::Sequence(children) => {
                let mut from = entry;
                for (i, c) in children.iter().enumerate() {
                    let to = if i + 1 == children.len() {
                        exit
                    } else {
                        self.place()
                    };
                    self.build(c, from, to);
                    from = to;
                }
            }
            ProcessTree::Xor(children) => {
                for c in children {
                    if matches!(c, ProcessTree::Silent) {
                        self.tau("skip", entry, exit);
                    } else {
                        let branch = self.place();
                        self.tau("choice", entry, branch);
                        self.build(c, branch, exit);
                    }
                }
            }
            ProcessTree::Parallel(children) => {
                let split = self.net.transition(format!("tau_split_{}", self.silent), None);
                let join = self.net.transition(format!("tau_join_{}", self.silent), None);
                self.silent += 1;
                self.net.input(entry, split).output(join, exit);
                for c in children {
                    let (b_in, b_out) = (self.place(), self.place());
                    self.net.output(split, b_in).input(b_out, join);
                    self.build(c, b_in, b_out);
                }
            }
            ProcessTree::Loop(children) => {
                let (body_in, body_out) = (self.place(), self.place());
                self.tau("loop_enter", entry, body_in);
                self.build(&children[0], body_in, body_out);
                self.tau("loop_exit", body_out, exit);
                for redo in &children[1..] {
                    if matches!(redo, ProcessTree::Silent) {
                        self.tau("redo", body_out, body_in);
                    } else {
                        let r_in = self.place();
                        self.tau("redo", body_out, r_in);
                        self.build(redo, r_in, body_in);
                    }
                }
            }
        }
    }
}

/// Builds a sound workflow net whose visible language equals the tree's.
pub fn tree_to_petri(tree: &ProcessTree) -> PetriNet {
    let mut b = Builder {
        net: NetBuilder::new(),
        silent: 0,
    };
    let source = b.net.place("source");
    let sink = b.net.place("sink");
    b.build(tree, source, sink);
    let n = b.net.place_count();
    b.net
        .build(Marking::with_token(n, source), Marking::with_token(n, sink))
        .expect("process tree leaves carry unique labels")
}
