//! Process discovery: directly-follows graphs, the Inductive Miner and the
//! conversion of process trees into workflow nets.

mod convert;
mod dfg;
mod miner;
mod tree;

pub use convert::tree_to_petri;
pub use dfg::{build_dfg, DirectlyFollowsGraph};
pub use miner::inductive_miner;
pub use tree::ProcessTree;

use crate::event_log::EventLog;
use crate::petri::PetriNet;

/// Inductive Miner followed by the tree-to-net conversion.
pub fn discover_net(log: &EventLog) -> (ProcessTree, PetriNet) {
    let tree = inductive_miner(log);
    let net = tree_to_petri(&tree);
    (tree, net)
}
