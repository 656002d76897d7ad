use std::collections::HashMap;
use std::io::{Read, Write};

use chrono::{DateTime, NaiveDateTime, SecondsFormat, TimeZone, Utc};

use super::{Event, EventLog, Trace};
use crate::error::{Error, Result};
use crate::Timestamp;

/// Names of the CSV columns holding case id, activity and timestamp.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMapping {
    pub case: String,
    pub activity: String,
    pub timestamp: String,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        Self {
            case: "case_id".into(),
            activity: "activity".into(),
            timestamp: "timestamp".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum TimestampFormat {
    #[default]
    Rfc3339,
    EpochMillis,
    EpochSeconds,
    /// A chrono `strftime` pattern. Patterns without an offset are read as UTC.
    Pattern(String),
}

impl std::str::FromStr for TimestampFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "rfc3339" | "iso8601" => TimestampFormat::Rfc3339,
            "epoch_ms" => TimestampFormat::EpochMillis,
            "epoch_s" => TimestampFormat::EpochSeconds,
            "" => return Err(Error::Config("empty timestamp format".into())),
            p => TimestampFormat::Pattern(p.to_string()),
        })
    }
}

impl TimestampFormat {
    pub fn parse(&self, raw: &str) -> std::result::Result<Timestamp, String> {
        let raw = raw.trim();
        match self {
            TimestampFormat::Rfc3339 => parse_iso8601(raw),
            TimestampFormat::EpochMillis => raw.parse::<i64>().map_err(|e| e.to_string()),
            TimestampFormat::EpochSeconds => raw
                .parse::<f64>()
                .map(|s| (s * 1000.0).round() as i64)
                .map_err(|e| e.to_string()),
            TimestampFormat::Pattern(p) => match DateTime::parse_from_str(raw, p) {
                Ok(dt) => Ok(dt.timestamp_millis()),
                Err(_) => NaiveDateTime::parse_from_str(raw, p)
                    .map(|n| n.and_utc().timestamp_millis())
                    .map_err(|e| e.to_string()),
            },
        }
    }
}

/// ISO-8601 with offset; a missing offset is taken as UTC.
pub(crate) fn parse_iso8601(raw: &str) -> std::result::Result<Timestamp, String> {
    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return Ok(dt.timestamp_millis());
    }
    for pat in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M:%S%.f%z"] {
        if let Ok(dt) = DateTime::parse_from_str(raw, pat) {
            return Ok(dt.timestamp_millis());
        }
        if let Ok(n) = NaiveDateTime::parse_from_str(raw, pat) {
            return Ok(n.and_utc().timestamp_millis());
        }
    }
    Err(format!("unrecognized ISO-8601 timestamp '{raw}'"))
}

pub(crate) fn format_iso8601(ms: Timestamp) -> String {
    Utc.timestamp_millis_opt(ms)
        .single()
        .map(|dt| dt.to_rfc3339_opts(SecondsFormat::Millis, true))
        .unwrap_or_else(|| ms.to_string())
}

/// Parses a header-first CSV into a log. Rows are grouped by case in order of
/// first appearance and sorted by timestamp within each case.
pub fn parse_csv(
    source: impl Read,
    mapping: &ColumnMapping,
    format: &TimestampFormat,
) -> Result<EventLog> {
    let mut reader = ::csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(source);
    let headers = reader
        .headers()
        .map_err(|e| Error::Csv {
            row: 1,
            message: e.to_string(),
        })?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Config(format!("column '{name}' not found in header")))
    };
    let (ci, ai, ti) = (
        column(&mapping.case)?,
        column(&mapping.activity)?,
        column(&mapping.timestamp)?,
    );

    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, Vec<Event>> = HashMap::new();
    for (i, record) in reader.records().enumerate() {
        // header is row 1
        let row = i + 2;
        let record = record.map_err(|e| Error::Csv {
            row,
            message: e.to_string(),
        })?;
        let field = |idx: usize| {
            record.get(idx).ok_or_else(|| Error::Csv {
                row,
                message: format!("missing field {idx}"),
            })
        };
        let case = field(ci)?.to_string();
        let activity = field(ai)?;
        let ts = format.parse(field(ti)?).map_err(|message| Error::Csv { row, message })?;
        let event = Event::new(activity, ts).map_err(|e| Error::Csv {
            row,
            message: e.to_string(),
        })?;
        groups
            .entry(case.clone())
            .or_insert_with(|| {
                order.push(case);
                Vec::new()
            })
            .push(event);
    }
    let traces = order
        .into_iter()
        .map(|case| {
            let events = groups.remove(&case).unwrap_or_default();
            Trace::new(case, events)
        })
        .collect::<Result<Vec<_>>>()?;
    EventLog::new(traces)
}

/// Writes the log as `case_id,activity,timestamp` with RFC 3339 UTC timestamps
/// at millisecond precision; readable back with the default mapping.
pub fn write_csv(log: &EventLog, sink: impl Write) -> Result<()> {
    let mut w = ::csv::Writer::from_writer(sink);
    let io = |e: ::csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(["case_id", "activity", "timestamp"]).map_err(io)?;
    for t in log.traces() {
        for e in t.events() {
            w.write_record([t.case_id(), &e.activity, &format_iso8601(e.timestamp)])
                .map_err(io)?;
        }
    }
    w.flush()?;
    Ok(())
}
