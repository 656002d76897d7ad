use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Block-structured process model.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProcessTree {
    Activity(String),
    Silent,
    Sequence(Vec<ProcessTree>),
    Xor(Vec<ProcessTree>),
    Parallel(Vec<ProcessTree>),
    /// First child is the body, the rest are redo parts.
    Loop(Vec<ProcessTree>),
}

impl ProcessTree {
    pub fn activity(label: &str) -> Self {
        ProcessTree::Activity(label.to_string())
    }

    /// Sequence, collapsing a single child.
    pub fn sequence(mut children: Vec<ProcessTree>) -> Self {
        if children.len() == 1 {
            children.pop().unwrap()
        } else {
            ProcessTree::Sequence(children)
        }
    }

    /// Exclusive choice, collapsing a single child.
    pub fn xor(mut children: Vec<ProcessTree>) -> Self {
        if children.len() == 1 {
            children.pop().unwrap()
        } else {
            ProcessTree::Xor(children)
        }
    }

    pub fn parallel(mut children: Vec<ProcessTree>) -> Self {
        if children.len() == 1 {
            children.pop().unwrap()
        } else {
            ProcessTree::Parallel(children)
        }
    }

    pub fn children(&self) -> &[ProcessTree] {
        match self {
            ProcessTree::Activity(_) | ProcessTree::Silent => &[],
            ProcessTree::Sequence(c)
            | ProcessTree::Xor(c)
            | ProcessTree::Parallel(c)
            | ProcessTree::Loop(c) => c,
        }
    }

    /// Activity labels in leaf order (with repetitions, if any).
    pub fn activities(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_activities(&mut out);
        out
    }

    fn collect_activities<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            ProcessTree::Activity(a) => out.push(a),
            ProcessTree::Silent => {}
            _ => self
                .children()
                .iter()
                .for_each(|c| c.collect_activities(out)),
        }
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(ProcessTree::depth).max().unwrap_or(0)
    }

    /// Structural checks: operators have at least two children; each activity
    /// label occurs in one leaf only.
    pub fn is_valid(&self) -> bool {
        let acts = self.activities();
        let unique: BTreeSet<_> = acts.iter().collect();
        unique.len() == acts.len() && self.arity_ok()
    }

    fn arity_ok(&self) -> bool {
        match self {
            ProcessTree::Activity(a) => !a.is_empty(),
            ProcessTree::Silent => true,
            _ => self.children().len() >= 2 && self.children().iter().all(Self::arity_ok),
        }
    }

    /// All traces of the tree's language with at most `max_len` events.
    pub fn language(&self, max_len: usize) -> BTreeSet<Vec<String>> {
        match self {
            ProcessTree::Activity(a) if max_len >= 1 => BTreeSet::from([vec![a.clone()]]),
            ProcessTree::Activity(_) => BTreeSet::new(),
            ProcessTree::Silent => BTreeSet::from([Vec::new()]),
            ProcessTree::Sequence(cs) => cs.iter().fold(BTreeSet::from([Vec::new()]), |acc, c| {
                concat(&acc, &c.language(max_len), max_len)
            }),
            ProcessTree::Xor(cs) => cs.iter().flat_map(|c| c.language(max_len)).collect(),
            ProcessTree::Parallel(cs) => cs.iter().fold(BTreeSet::from([Vec::new()]), |acc, c| {
                let lc = c.language(max_len);
                let mut out = BTreeSet::new();
                for x in &acc {
                    for y in &lc {
                        if x.len() + y.len() <= max_len {
                            shuffle(x, y, &mut Vec::new(), &mut out);
                        }
                    }
                }
                out
            }),
            ProcessTree::Loop(cs) => {
                let body = cs[0].language(max_len);
                let redo: BTreeSet<Vec<String>> =
                    cs[1..].iter().flat_map(|c| c.language(max_len)).collect();
                let step = concat(&redo, &body, max_len);
                let mut all = body.clone();
                let mut frontier = body;
                loop {
                    let next: BTreeSet<_> = concat(&frontier, &step, max_len)
                        .into_iter()
                        .filter(|t| !all.contains(t))
                        .collect();
                    if next.is_empty() {
                        break;
                    }
                    all.extend(next.iter().cloned());
                    frontier = next;
                }
                all
            }
        }
    }
}

fn concat(
    a: &BTreeSet<Vec<String>>,
    b: &BTreeSet<Vec<String>>,
    max_len: usize,
) -> BTreeSet<Vec<String>> {
    let mut out = BTreeSet::new();
    for x in a {
        for y in b {
            if x.len() + y.len() <= max_len {
                let mut t = x.clone();
                t.extend(y.iter().cloned());
                out.insert(t);
            }
        }
    }
    out
}

fn shuffle(x: &[String], y: &[String], cur: &mut Vec<String>, out: &mut BTreeSet<Vec<String>>) {
    if x.is_empty() && y.is_empty() {
        out.insert(cur.clone());
        return;
    }
    if let Some((h, rest)) = x.split_first() {
        cur.push(h.clone());
        shuffle(rest, y, cur, out);
        cur.pop();
    }
    if let Some((h, rest)) = y.split_first() {
        cur.push(h.clone());
        shuffle(x, rest, cur, out);
        cur.pop();
    }
}

impl fmt::Display for ProcessTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self {
            ProcessTree::Activity(a) => return write!(f, "'{a}'"),
            ProcessTree::Silent => return write!(f, "tau"),
            ProcessTree::Sequence(_) => "->",
            ProcessTree::Xor(_) => "X",
            ProcessTree::Parallel(_) => "+",
            ProcessTree::Loop(_) => "*",
        };
        write!(f, "{op}( ")?;
        for (i, c) in self.children().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, " )")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(s: &str) -> ProcessTree {
        ProcessTree::activity(s)
    }

    fn set(traces: &[&[&str]]) -> BTreeSet<Vec<String>> {
        traces
            .iter()
            .map(|t| t.iter().map(|s| s.to_string()).collect())
            .collect()
    }

    #[test]
    fn parallel_language_is_interleaving() {
        let t = ProcessTree::Parallel(vec![a("A"), a("B")]);
        assert_eq!(t.language(5), set(&[&["A", "B"], &["B", "A"]]));
    }

    #[test]
    fn loop_language_unrolls() {
        let t = ProcessTree::Loop(vec![a("A"), a("B")]);
        assert_eq!(
            t.language(5),
            set(&[&["A"], &["A", "B", "A"], &["A", "B", "A", "B", "A"]])
        );
    }

    #[test]
    fn silent_loop_terminates() {
        let t = ProcessTree::Loop(vec![ProcessTree::Silent, a("A")]);
        assert_eq!(t.language(2), set(&[&[], &["A"], &["A", "A"]]));
    }

    #[test]
    fn display_and_validity() {
        let t = ProcessTree::Sequence(vec![a("A"), ProcessTree::Xor(vec![a("B"), ProcessTree::Silent])]);
        assert_eq!(t.to_string(), "->( 'A', X( 'B', tau ) )");
        assert!(t.is_valid());
        assert!(!ProcessTree::Sequence(vec![a("A"), a("A")]).is_valid());
        assert!(!ProcessTree::Loop(vec![a("A")]).is_valid());
        assert_eq!(t.depth(), 3);
    }
}
