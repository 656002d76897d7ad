//! Basic Inductive Miner on directly-follows graphs.
//!
//! Cuts are tried in the order exclusive choice, sequence, parallel, loop.
//! When none applies the sub-log is covered by a flower model. Activities are
//! interned in lexicographic order, so every partition and tie-break follows
//! label order.

// the closures over adjacency matrices index two rows at once
#![allow(clippy::needless_range_loop)]

use std::collections::{BTreeMap, BTreeSet};

use super::ProcessTree;
use crate::event_log::EventLog;

/// Trace variants (activity ids) with multiplicities.
type Variants = BTreeMap<Vec<usize>, usize>;

/// Discovers a process tree whose language contains every trace of `log`.
pub fn inductive_miner(log: &EventLog) -> ProcessTree {
    let voc = log.vocabulary();
    let mut variants = Variants::new();
    for t in log.traces() {
        let v = t
            .activities()
            .map(|a| voc.position(a).expect("vocabulary covers the log"))
            .collect();
        *variants.entry(v).or_default() += 1;
    }
    Miner {
        labels: voc.labels(),
    }
    .mine(&variants)
}

struct Miner<'a> {
    labels: &'a [String],
}

/// Directly-follows graph over a node subset, addressed by local index.
struct Dfg {
    nodes: Vec<usize>,
    adj: Vec<Vec<bool>>,
    start: Vec<bool>,
    end: Vec<bool>,
}

impl Dfg {
    fn new(log: &Variants) -> Self {
        let nodes: Vec<usize> = log
            .keys()
            .flatten()
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let local: BTreeMap<usize, usize> =
            nodes.iter().enumerate().map(|(i, &a)| (a, i)).collect();
        let n = nodes.len();
        let mut adj = vec![vec![false; n]; n];
        let mut start = vec![false; n];
        let mut end = vec![false; n];
        for trace in log.keys() {
            if let (Some(f), Some(l)) = (trace.first(), trace.last()) {
                start[local[f]] = true;
                end[local[l]] = true;
            }
            for w in trace.windows(2) {
                adj[local[&w[0]]][local[&w[1]]] = true;
            }
        }
        Self {
            nodes,
            adj,
            start,
            end,
        }
    }

    fn len(&self) -> usize {
        self.nodes.len()
    }

    /// `reach[i][j]`: a path of length ≥ 1 leads from i to j.
    fn reachability(&self) -> Vec<Vec<bool>> {
        let n = self.len();
        let mut reach = self.adj.clone();
        // Floyd–Warshall closure; node counts are small
        for k in 0..n {
            for i in 0..n {
                if reach[i][k] {
                    for j in 0..n {
                        if reach[k][j] {
                            reach[i][j] = true;
                        }
                    }
                }
            }
        }
        reach
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut c = x;
        while self.0[c] != r {
            let next = self.0[c];
            self.0[c] = r;
            c = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        // keep the smaller root so groups are keyed by their first member
        if ra < rb {
            self.0[rb] = ra;
        } else if rb < ra {
            self.0[ra] = rb;
        }
    }

    /// Groups of local indices, ordered by smallest member.
    fn groups(&mut self) -> Vec<Vec<usize>> {
        let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..self.0.len() {
            let r = self.find(i);
            by_root.entry(r).or_default().push(i);
        }
        by_root.into_values().collect()
    }
}

impl Miner<'_> {
    fn mine(&self, log: &Variants) -> ProcessTree {
        if log.keys().all(Vec::is_empty) {
            return ProcessTree::Silent;
        }
        if log.contains_key(&Vec::new()) {
            let rest: Variants = log
                .iter()
                .filter(|(t, _)| !t.is_empty())
                .map(|(t, c)| (t.clone(), *c))
                .collect();
            return ProcessTree::Xor(vec![ProcessTree::Silent, self.mine(&rest)]);
        }

        let dfg = Dfg::new(log);
        if dfg.len() == 1 {
            let a = dfg.nodes[0];
            let leaf = ProcessTree::Activity(self.labels[a].clone());
            return if log.keys().all(|t| t.len() == 1) {
                leaf
            } else {
                ProcessTree::Loop(vec![leaf, ProcessTree::Silent])
            };
        }

        if let Some(groups) = xor_cut(&dfg) {
            let children = groups
                .iter()
                .map(|g| self.mine(&project_xor(log, &dfg, g)))
                .collect();
            return ProcessTree::Xor(children);
        }
        if let Some(groups) = sequence_cut(&dfg) {
            let subs = project_split(log, &dfg, &groups, false);
            return ProcessTree::Sequence(subs.iter().map(|s| self.mine(s)).collect());
        }
        if let Some(groups) = parallel_cut(&dfg) {
            let subs = project_split(log, &dfg, &groups, false);
            return ProcessTree::Parallel(subs.iter().map(|s| self.mine(s)).collect());
        }
        if let Some(groups) = loop_cut(&dfg) {
            let subs = project_split(log, &dfg, &groups, true);
            return ProcessTree::Loop(subs.iter().map(|s| self.mine(s)).collect());
        }
        self.flower(&dfg)
    }

    fn flower(&self, dfg: &Dfg) -> ProcessTree {
        let choice = ProcessTree::xor(
            dfg.nodes
                .iter()
                .map(|&a| ProcessTree::Activity(self.labels[a].clone()))
                .collect(),
        );
        ProcessTree::Loop(vec![choice, ProcessTree::Silent])
    }
}

fn xor_cut(dfg: &Dfg) -> Option<Vec<Vec<usize>>> {
    let n = dfg.len();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in 0..n {
            if dfg.adj[i][j] {
                uf.union(i, j);
            }
        }
    }
    let groups = uf.groups();
    (groups.len() >= 2).then_some(groups)
}

fn sequence_cut(dfg: &Dfg) -> Option<Vec<Vec<usize>>> {
    let n = dfg.len();
    let reach = dfg.reachability();
    let mut uf = UnionFind::new(n);
    // same strongly connected component, or mutually unreachable
    for i in 0..n {
        for j in i + 1..n {
            if reach[i][j] == reach[j][i] {
                uf.union(i, j);
            }
        }
    }
    loop {
        let groups = uf.groups();
        if groups.len() < 2 {
            return None;
        }
        let g = groups.len();
        let mut greach = vec![vec![false; g]; g];
        for (a, ga) in groups.iter().enumerate() {
            for (b, gb) in groups.iter().enumerate() {
                greach[a][b] = a != b && ga.iter().any(|&x| gb.iter().any(|&y| reach[x][y]));
            }
        }
        for k in 0..g {
            for a in 0..g {
                if greach[a][k] {
                    for b in 0..g {
                        if greach[k][b] {
                            greach[a][b] = true;
                        }
                    }
                }
            }
        }
        let mut merged = false;
        for a in 0..g {
            for b in a + 1..g {
                if greach[a][b] && greach[b][a] {
                    uf.union(groups[a][0], groups[b][0]);
                    merged = true;
                }
            }
        }
        if merged {
            continue;
        }
        // acyclic tournament: order by how many groups each one precedes
        let mut order: Vec<usize> = (0..g).collect();
        order.sort_by_key(|&a| std::cmp::Reverse(greach[a].iter().filter(|&&r| r).count()));
        return Some(order.into_iter().map(|a| groups[a].clone()).collect());
    }
}

fn parallel_cut(dfg: &Dfg) -> Option<Vec<Vec<usize>>> {
    let n = dfg.len();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if !(dfg.adj[i][j] && dfg.adj[j][i]) {
                uf.union(i, j);
            }
        }
    }
    let groups = uf.groups();
    let complete = |g: &Vec<usize>| g.iter().any(|&x| dfg.start[x]) && g.iter().any(|&x| dfg.end[x]);
    let (mut good, deficient): (Vec<_>, Vec<_>) = groups.into_iter().partition(complete);
    if good.is_empty() {
        return None;
    }
    for g in deficient {
        good[0].extend(g);
    }
    good[0].sort_unstable();
    (good.len() >= 2).then_some(good)
}

/// Body first, then redo groups.
fn loop_cut(dfg: &Dfg) -> Option<Vec<Vec<usize>>> {
    let n = dfg.len();
    let in_body0: Vec<bool> = (0..n).map(|i| dfg.start[i] || dfg.end[i]).collect();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in 0..n {
            if dfg.adj[i][j] && !in_body0[i] && !in_body0[j] {
                uf.union(i, j);
            }
        }
    }
    let mut body: Vec<usize> = (0..n).filter(|&i| in_body0[i]).collect();
    let mut redo = Vec::new();
    for comp in uf.groups() {
        if in_body0[comp[0]] {
            continue;
        }
        let mut entered = false;
        let mut exited = false;
        let mut ok = true;
        for &c in &comp {
            for x in (0..n).filter(|&x| in_body0[x]) {
                if dfg.adj[x][c] {
                    entered = true;
                    ok &= dfg.end[x];
                }
                if dfg.adj[c][x] {
                    exited = true;
                    ok &= dfg.start[x];
                }
            }
        }
        if ok && entered && exited {
            redo.push(comp);
        } else {
            body.extend(comp);
        }
    }
    if redo.is_empty() {
        return None;
    }
    body.sort_unstable();
    let mut groups = vec![body];
    groups.extend(redo);
    Some(groups)
}

fn project_xor(log: &Variants, dfg: &Dfg, group: &[usize]) -> Variants {
    let members: BTreeSet<usize> = group.iter().map(|&i| dfg.nodes[i]).collect();
    log.iter()
        .filter(|(t, _)| members.contains(&t[0]))
        .map(|(t, c)| (t.clone(), *c))
        .collect()
}

/// Splits each trace over `groups`. Without `segments`, group `g` receives the
/// projection of the trace onto its activities (one sub-trace per trace).
/// With `segments`, maximal runs of the same group each become a sub-trace.
fn project_split(log: &Variants, dfg: &Dfg, groups: &[Vec<usize>], segments: bool) -> Vec<Variants> {
    let mut group_of = BTreeMap::new();
    for (gi, g) in groups.iter().enumerate() {
        for &i in g {
            group_of.insert(dfg.nodes[i], gi);
        }
    }
    let mut subs = vec![Variants::new(); groups.len()];
    for (trace, &count) in log {
        if segments {
            let mut run: Vec<usize> = Vec::new();
            let mut run_group = None;
            for &a in trace {
                let g = group_of[&a];
                if run_group != Some(g) {
                    if let Some(rg) = run_group {
                        *subs[rg].entry(std::mem::take(&mut run)).or_default() += count;
                    }
                    run_group = Some(g);
                }
                run.push(a);
            }
            if let Some(rg) = run_group {
                *subs[rg].entry(run).or_default() += count;
            }
        } else {
            let mut parts = vec![Vec::new(); groups.len()];
            for &a in trace {
                parts[group_of[&a]].push(a);
            }
            for (gi, p) in parts.into_iter().enumerate() {
                *subs[gi].entry(p).or_default() += count;
            }
        }
    }
    subs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event_log::Trace;

    fn log(traces: &[&[&str]]) -> EventLog {
        EventLog::new(
            traces
                .iter()
                .enumerate()
                .map(|(i, acts)| {
                    let pairs: Vec<(&str, i64)> =
                        acts.iter().enumerate().map(|(j, a)| (*a, j as i64)).collect();
                    Trace::from_pairs(&i.to_string(), &pairs).unwrap()
                })
                .collect(),
        )
        .unwrap()
    }

    fn a(s: &str) -> ProcessTree {
        ProcessTree::activity(s)
    }

    #[test]
    fn sequence() {
        assert_eq!(
            inductive_miner(&log(&[&["A", "B"]])),
            ProcessTree::Sequence(vec![a("A"), a("B")])
        );
    }

    #[test]
    fn exclusive_choice() {
        assert_eq!(
            inductive_miner(&log(&[&["A"], &["B"]])),
            ProcessTree::Xor(vec![a("A"), a("B")])
        );
    }

    #[test]
    fn parallel() {
        let l = log(&[&["A", "B"], &["B", "A"]]);
        let dfg = Dfg::new(&variants(&l));
        // oracle: no exclusive or sequence partition exists on a 2-cycle
        assert!(brute_force_xor_or_sequence(&dfg).is_none());
        assert!(xor_cut(&dfg).is_none() && sequence_cut(&dfg).is_none());
        assert_eq!(
            inductive_miner(&l),
            ProcessTree::Parallel(vec![a("A"), a("B")])
        );
    }

    #[test]
    fn loop_with_redo() {
        let tree = inductive_miner(&log(&[&["A"], &["A", "B", "A"]]));
        assert_eq!(tree, ProcessTree::Loop(vec![a("A"), a("B")]));
        let lang = tree.language(3);
        assert!(lang.contains(&vec!["A".to_string()]));
        assert!(lang.contains(&vec!["A".to_string(), "B".into(), "A".into()]));
    }

    #[test]
    fn empty_trace_gives_skip() {
        let mut l = variants(&log(&[&["A"]]));
        l.insert(Vec::new(), 1);
        let labels = vec!["A".to_string()];
        let tree = Miner { labels: &labels }.mine(&l);
        assert_eq!(tree, ProcessTree::Xor(vec![ProcessTree::Silent, a("A")]));
    }

    #[test]
    fn repeated_single_activity_loops() {
        let tree = inductive_miner(&log(&[&["A", "A"], &["A"]]));
        assert_eq!(tree, ProcessTree::Loop(vec![a("A"), ProcessTree::Silent]));
    }

    #[test]
    fn falls_through_to_flower() {
        let l = log(&[&["A", "B", "A", "B"], &["A", "B"]]);
        let tree = inductive_miner(&l);
        assert_eq!(
            tree,
            ProcessTree::Loop(vec![
                ProcessTree::Xor(vec![a("A"), a("B")]),
                ProcessTree::Silent
            ])
        );
    }

    #[test]
    fn nested_structure() {
        let l = log(&[
            &["A", "B", "C", "E"],
            &["A", "C", "B", "E"],
            &["A", "D", "E"],
        ]);
        let tree = inductive_miner(&l);
        assert_eq!(
            tree,
            ProcessTree::Sequence(vec![
                a("A"),
                ProcessTree::Xor(vec![ProcessTree::Parallel(vec![a("B"), a("C")]), a("D")]),
                a("E"),
            ])
        );
    }

    fn variants(l: &EventLog) -> Variants {
        let voc = l.vocabulary();
        let mut v = Variants::new();
        for t in l.traces() {
            *v.entry(t.activities().map(|a| voc.position(a).unwrap()).collect())
                .or_default() += 1;
        }
        v
    }

    /// Enumerates every 2-partition and checks the exclusive/sequence cut
    /// conditions directly on the edges.
    fn brute_force_xor_or_sequence(dfg: &Dfg) -> Option<(Vec<usize>, Vec<usize>)> {
        let n = dfg.len();
        let reach = dfg.reachability();
        for mask in 1..(1u32 << n) - 1 {
            let (x, y): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| mask & (1 << i) != 0);
            let no_edges = x.iter().all(|&i| y.iter().all(|&j| !dfg.adj[i][j] && !dfg.adj[j][i]));
            let ordered = x.iter().all(|&i| y.iter().all(|&j| reach[i][j] && !reach[j][i]));
            if no_edges || ordered {
                return Some((x, y));
            }
        }
        None
    }
}
