//! Event logs: completed activity occurrences grouped by case.
//!
//! Timestamps are integer milliseconds since the Unix epoch. Only completion
//! times are modeled.

mod csv;
mod xes;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Timestamp;

pub use self::csv::{parse_csv, write_csv, ColumnMapping, TimestampFormat};
pub use self::xes::parse_xes;

const MS_PER_DAY: f64 = 86_400_000.0;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub activity: String,
    pub timestamp: Timestamp,
}

impl Event {
    pub fn new(activity: impl Into<String>, timestamp: Timestamp) -> Result<Self> {
        let activity = activity.into();
        if activity.is_empty() {
            return Err(Error::InvalidLog("event with empty activity label".into()));
        }
        Ok(Self {
            activity,
            timestamp,
        })
    }
}

/// One case: a non-empty, time-ordered sequence of events.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    case_id: String,
    events: Vec<Event>,
}

impl Trace {
    /// Builds a trace, stably sorting the events by timestamp.
    pub fn new(case_id: impl Into<String>, mut events: Vec<Event>) -> Result<Self> {
        let case_id = case_id.into();
        if events.is_empty() {
            return Err(Error::InvalidLog(format!("case '{case_id}' has no events")));
        }
        events.sort_by_key(|e| e.timestamp);
        Ok(Self { case_id, events })
    }

    /// Convenience constructor from `(activity, timestamp)` pairs.
    pub fn from_pairs<S: AsRef<str>>(case_id: &str, pairs: &[(S, Timestamp)]) -> Result<Self> {
        let events = pairs
            .iter()
            .map(|(a, t)| Event::new(a.as_ref(), *t))
            .collect::<Result<Vec<_>>>()?;
        Self::new(case_id, events)
    }

    pub fn case_id(&self) -> &str {
        &self.case_id
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn start(&self) -> Timestamp {
        self.events[0].timestamp
    }

    pub fn end(&self) -> Timestamp {
        self.events[self.events.len() - 1].timestamp
    }

    /// Case duration in milliseconds.
    pub fn duration_ms(&self) -> i64 {
        self.end() - self.start()
    }

    pub fn activities(&self) -> impl Iterator<Item = &str> {
        self.events.iter().map(|e| e.activity.as_str())
    }

    /// The events observed up to and including `t0`.
    pub fn prefix_at(&self, t0: Timestamp) -> Result<Trace> {
        if t0 < self.start() {
            return Err(Error::BeforeCaseStart {
                t0,
                start: self.start(),
            });
        }
        let cut = self.events.partition_point(|e| e.timestamp <= t0);
        Ok(Trace {
            case_id: self.case_id.clone(),
            events: self.events[..cut].to_vec(),
        })
    }

    /// The events strictly after `t0` (may be empty, so returned as a slice).
    pub fn suffix_after(&self, t0: Timestamp) -> &[Event] {
        let cut = self.events.partition_point(|e| e.timestamp <= t0);
        &self.events[cut..]
    }
}

/// Activity labels in lexicographic order with index lookup.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn new<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: BTreeSet<String> = labels.into_iter().map(Into::into).collect();
        let labels: Vec<String> = labels.into_iter().collect();
        let index = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();
        Self { labels, index }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.index.contains_key(label)
    }
}

/// An immutable collection of traces with unique case ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventLog {
    traces: Vec<Trace>,
    vocabulary: Vocabulary,
}

impl EventLog {
    pub fn new(traces: Vec<Trace>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(traces.len());
        for t in &traces {
            if !seen.insert(t.case_id.as_str()) {
                return Err(Error::InvalidLog(format!(
                    "duplicate case id '{}'",
                    t.case_id
                )));
            }
        }
        let vocabulary = Vocabulary::new(
            traces
                .iter()
                .flat_map(|t| t.events.iter().map(|e| e.activity.as_str())),
        );
        Ok(Self { traces, vocabulary })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Reads XES or CSV from a file, transparently decompressing gzip input.
    /// Files ending in `.csv` (optionally `.csv.gz`) are read as CSV with the
    /// given mapping; everything else as XES.
    pub fn from_path(
        path: &std::path::Path,
        mapping: &ColumnMapping,
        format: &TimestampFormat,
    ) -> Result<Self> {
        let bytes = read_maybe_gzip(std::fs::File::open(path)?)?;
        let name = path.to_string_lossy().to_ascii_lowercase();
        let name = name.strip_suffix(".gz").unwrap_or(&name);
        if name.ends_with(".csv") {
            parse_csv(bytes.as_slice(), mapping, format)
        } else {
            parse_xes(bytes.as_slice())
        }
    }

    pub fn traces(&self) -> &[Trace] {
        &self.traces
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn get(&self, case_id: &str) -> Option<&Trace> {
        self.traces.iter().find(|t| t.case_id == case_id)
    }

    pub fn into_traces(self) -> Vec<Trace> {
        self.traces
    }

    /// Builds a log from a subset of this log's traces, by index.
    pub fn select(&self, indices: &[usize]) -> Result<EventLog> {
        EventLog::new(indices.iter().map(|&i| self.traces[i].clone()).collect())
    }

    /// Concatenates two logs. Case ids must stay unique.
    pub fn concat(&self, other: &EventLog) -> Result<EventLog> {
        let mut traces = self.traces.clone();
        traces.extend(other.traces.iter().cloned());
        EventLog::new(traces)
    }

    /// Out-of-time split: the `test_count` latest-starting traces form the
    /// test log; training keeps only traces that completed strictly before the
    /// earliest test start. Traces overlapping that boundary are dropped.
    pub fn split_out_of_time(&self, test_count: usize) -> Result<(EventLog, EventLog)> {
        if test_count >= self.traces.len() {
            return Err(Error::Split(format!(
                "test_count {test_count} must be below the number of traces {}",
                self.traces.len()
            )));
        }
        let mut order: Vec<&Trace> = self.traces.iter().collect();
        order.sort_by_key(|t| t.start());
        let cut = order.len() - test_count;
        let (head, tail) = order.split_at(cut);
        let boundary = tail.first().map(|t| t.start()).unwrap_or(i64::MAX);
        let train: Vec<Trace> = head
            .iter()
            .filter(|t| t.end() < boundary)
            .map(|t| (*t).clone())
            .collect();
        if train.is_empty() {
            return Err(Error::Split(
                "no training trace completes before the test boundary".into(),
            ));
        }
        let test = tail.iter().map(|t| (*t).clone()).collect();
        Ok((EventLog::new(train)?, EventLog::new(test)?))
    }

    /// Mean case duration in milliseconds, rounded to the nearest millisecond.
    pub fn mean_case_duration_ms(&self) -> Result<i64> {
        if self.traces.is_empty() {
            return Err(Error::EmptyLog);
        }
        let total: i128 = self.traces.iter().map(|t| t.duration_ms() as i128).sum();
        let n = self.traces.len() as i128;
        // round half away from zero; durations are non-negative
        Ok(((2 * total + n) / (2 * n)) as i64)
    }

    pub fn descriptive_stats(&self) -> LogStats {
        if self.traces.is_empty() {
            return LogStats::default();
        }
        let cases = self.traces.len();
        let events: usize = self.traces.iter().map(Trace::len).sum();
        let max_case_length = self.traces.iter().map(Trace::len).max().unwrap_or(0);
        let durations: Vec<f64> = self
            .traces
            .iter()
            .map(|t| t.duration_ms() as f64 / MS_PER_DAY)
            .collect();
        LogStats {
            cases,
            events,
            event_classes: self.vocabulary.len(),
            max_case_length,
            avg_case_length: events as f64 / cases as f64,
            max_case_time_days: durations.iter().copied().fold(0.0, f64::max),
            avg_case_time_days: durations.iter().sum::<f64>() / cases as f64,
        }
    }
}

pub(crate) fn read_maybe_gzip(mut source: impl Read) -> Result<Vec<u8>> {
    let mut raw = Vec::new();
    source.read_to_end(&mut raw)?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        flate2::read::MultiGzDecoder::new(raw.as_slice()).read_to_end(&mut out)?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

/// Descriptive statistics of a log; times in days.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LogStats {
    pub cases: usize,
    pub events: usize,
    pub event_classes: usize,
    pub max_case_length: usize,
    pub avg_case_length: f64,
    pub max_case_time_days: f64,
    pub avg_case_time_days: f64,
}

impl std::fmt::Display for LogStats {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "cases\t{}", self.cases)?;
        writeln!(f, "events\t{}", self.events)?;
        writeln!(f, "event_classes\t{}", self.event_classes)?;
        writeln!(f, "max_case_length\t{}", self.max_case_length)?;
        writeln!(f, "avg_case_length\t{:.2}", self.avg_case_length)?;
        writeln!(f, "max_case_time_days\t{:.2}", self.max_case_time_days)?;
        write!(f, "avg_case_time_days\t{:.2}", self.avg_case_time_days)
    }
}
