use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::event_log::EventLog;

/// Directly-follows relation of a log with frequencies.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectlyFollowsGraph {
    /// Activity → number of occurrences.
    pub activities: BTreeMap<String, usize>,
    pub edges: BTreeMap<(String, String), usize>,
    pub start_activities: BTreeMap<String, usize>,
    pub end_activities: BTreeMap<String, usize>,
}

impl DirectlyFollowsGraph {
    pub fn edge(&self, from: &str, to: &str) -> usize {
        self.edges
            .get(&(from.to_string(), to.to_string()))
            .copied()
            .unwrap_or(0)
    }

    pub fn add_trace<'a>(&mut self, activities: impl IntoIterator<Item = &'a str>) {
        let mut prev: Option<&str> = None;
        for a in activities {
            *self.activities.entry(a.to_string()).or_default() += 1;
            match prev {
                Some(p) => *self.edges.entry((p.to_string(), a.to_string())).or_default() += 1,
                None => *self.start_activities.entry(a.to_string()).or_default() += 1,
            }
            prev = Some(a);
        }
        if let Some(p) = prev {
            *self.end_activities.entry(p.to_string()).or_default() += 1;
        }
    }
}

pub fn build_dfg(log: &EventLog) -> DirectlyFollowsGraph {
    let mut dfg = DirectlyFollowsGraph::default();
    for t in log.traces() {
        dfg.add_trace(t.activities());
    }
    dfg
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

    #[test]
    fn repeated_pair() {
        let dfg = build_dfg(&log(&[&["A", "B"], &["A", "B"]]));
        assert_eq!(dfg.edge("A", "B"), 2);
        assert_eq!(dfg.start_activities["A"], 2);
        assert_eq!(dfg.end_activities["B"], 2);
        assert_eq!(dfg.edges.len(), 1);
    }

    #[test]
    fn single_event_traces() {
        let dfg = build_dfg(&log(&[&["A"], &["A"]]));
        assert!(dfg.edges.is_empty());
        assert_eq!(dfg.start_activities, dfg.end_activities);
    }

    #[test]
    fn both_directions() {
        let dfg = build_dfg(&log(&[&["A", "B"], &["B", "A"]]));
        assert_eq!(dfg.edge("A", "B"), 1);
        assert_eq!(dfg.edge("B", "A"), 1);
    }
}
