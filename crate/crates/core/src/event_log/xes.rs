//! Minimal XES reader: `trace`/`event` elements with `concept:name` and
//! `time:timestamp`. Events carrying a non-complete `lifecycle:transition` are
//! skipped; all other attributes are ignored.

use std::io::Read;

use quick_xml::events::{BytesStart, Event as XmlEvent};
use quick_xml::Reader;

use super::csv::parse_iso8601;
use super::{read_maybe_gzip, Event, EventLog, Trace};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scope {
    Trace,
    Event,
    Other,
}

#[derive(Default)]
struct PendingEvent {
    activity: Option<String>,
    timestamp: Option<String>,
    lifecycle: Option<String>,
}

#[derive(Default)]
struct PendingTrace {
    case_id: Option<String>,
    events: Vec<PendingEvent>,
}

/// Parses XES from a byte stream (gzip is detected and decompressed).
pub fn parse_xes(source: impl Read) -> Result<EventLog> {
    let bytes = read_maybe_gzip(source)?;
    let line_of = |pos: u64| -> usize {
        let end = (pos as usize).min(bytes.len());
        bytes[..end].iter().filter(|&&b| b == b'\n').count() + 1
    };
    let mut reader = Reader::from_reader(bytes.as_slice());
    reader.config_mut().trim_text(true);

    let mut stack: Vec<Scope> = Vec::new();
    let mut current: Option<PendingTrace> = None;
    let mut traces = Vec::new();
    let mut buf = Vec::new();

    loop {
        let ev = reader.read_event_into(&mut buf).map_err(|e| Error::Xml {
            line: line_of(reader.error_position()),
            message: e.to_string(),
        })?;
        let xml_err = |message: String| Error::Xml {
            line: line_of(reader.buffer_position()),
            message,
        };
        match ev {
            XmlEvent::Start(ref e) => {
                let scope = match e.local_name().as_ref() {
                    b"trace" if stack.last() != Some(&Scope::Trace) => {
                        current = Some(PendingTrace::default());
                        Scope::Trace
                    }
                    b"event" if stack.last() == Some(&Scope::Trace) => {
                        if let Some(t) = current.as_mut() {
                            t.events.push(PendingEvent::default());
                        }
                        Scope::Event
                    }
                    _ => {
                        handle_attribute(e, stack.last().copied(), current.as_mut())
                            .map_err(xml_err)?;
                        Scope::Other
                    }
                };
                stack.push(scope);
            }
            XmlEvent::Empty(ref e) => match e.local_name().as_ref() {
                b"event" if stack.last() == Some(&Scope::Trace) => {
                    if let Some(t) = current.as_mut() {
                        t.events.push(PendingEvent::default());
                    }
                }
                _ => handle_attribute(e, stack.last().copied(), current.as_mut())
                    .map_err(xml_err)?,
            },
            XmlEvent::End(_) => {
                if stack.pop() == Some(Scope::Trace) {
                    if let Some(t) = current.take() {
                        let n = traces.len();
                        if let Some(trace) = finish_trace(t, n)? {
                            traces.push(trace);
                        }
                    }
                }
            }
            XmlEvent::Eof => break,
            _ => {}
        }
        buf.clear();
    }
    if !stack.is_empty() {
        return Err(Error::Xml {
            line: line_of(bytes.len() as u64),
            message: "unexpected end of document".into(),
        });
    }
    EventLog::new(traces)
}

fn handle_attribute(
    e: &BytesStart<'_>,
    parent: Option<Scope>,
    trace: Option<&mut PendingTrace>,
) -> std::result::Result<(), String> {
    let (Some(parent @ (Scope::Trace | Scope::Event)), Some(trace)) = (parent, trace) else {
        return Ok(());
    };
    let tag = e.local_name();
    if !matches!(tag.as_ref(), b"string" | b"date") {
        return Ok(());
    }
    let mut key = None;
    let mut value = None;
    for attr in e.attributes() {
        let attr = attr.map_err(|e| e.to_string())?;
        let v = attr.unescape_value().map_err(|e| e.to_string())?.into_owned();
        match attr.key.as_ref() {
            b"key" => key = Some(v),
            b"value" => value = Some(v),
            _ => {}
        }
    }
    let (Some(key), Some(value)) = (key, value) else {
        return Ok(());
    };
    match parent {
        Scope::Trace if key == "concept:name" => trace.case_id = Some(value),
        Scope::Event => {
            if let Some(ev) = trace.events.last_mut() {
                match key.as_str() {
                    "concept:name" => ev.activity = Some(value),
                    "time:timestamp" => ev.timestamp = Some(value),
                    "lifecycle:transition" => ev.lifecycle = Some(value),
                    _ => {}
                }
            }
        }
        _ => {}
    }
    Ok(())
}

fn finish_trace(t: PendingTrace, ordinal: usize) -> Result<Option<Trace>> {
    let case_id = t.case_id.unwrap_or_else(|| format!("trace_{ordinal}"));
    let mut events = Vec::with_capacity(t.events.len());
    for (i, ev) in t.events.into_iter().enumerate() {
        if ev
            .lifecycle
            .as_deref()
            .is_some_and(|l| !l.eq_ignore_ascii_case("complete"))
        {
            continue;
        }
        let missing = |what| Error::MissingAttribute {
            case_id: case_id.clone(),
            event_index: i,
            missing: what,
        };
        let activity = ev.activity.ok_or_else(|| missing("concept:name"))?;
        let raw = ev.timestamp.ok_or_else(|| missing("time:timestamp"))?;
        let ts = parse_iso8601(&raw).map_err(|m| {
            Error::InvalidLog(format!("case '{case_id}', event {i}: {m}"))
        })?;
        events.push(Event::new(activity, ts)?);
    }
    if events.is_empty() {
        log::warn!("skipping case '{case_id}' without complete events");
        return Ok(None);
    }
    Trace::new(case_id, events).map(Some)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<log xes.version="1.0">
  <global scope="event"><string key="concept:name" value="__INVALID__"/></global>
  <string key="concept:name" value="the log"/>
  <trace>
    <string key="concept:name" value="case-1"/>
    <event>
      <string key="concept:name" value="A"/>
      <date key="time:timestamp" value="2020-01-01T00:00:00.000+00:00"/>
    </event>
    <event>
      <string key="concept:name" value="B"/>
      <date key="time:timestamp" value="2020-01-01T00:01:00.000+00:00"/>
      <string key="lifecycle:transition" value="complete"/>
    </event>
  </trace>
</log>"#;

    #[test]
    fn minimal_document() {
        let log = parse_xes(MINIMAL.as_bytes()).unwrap();
        assert_eq!(log.len(), 1);
        assert_eq!(log.vocabulary().labels(), ["A", "B"]);
        let t = &log.traces()[0];
        assert_eq!(t.case_id(), "case-1");
        assert_eq!(t.duration_ms(), 60_000);
    }

    #[test]
    fn unsorted_events_are_sorted() {
        let doc = r#"<log><trace><string key="concept:name" value="c"/>
          <event><string key="concept:name" value="late"/><date key="time:timestamp" value="2020-01-01T10:00:00Z"/></event>
          <event><string key="concept:name" value="early"/><date key="time:timestamp" value="2020-01-01T09:00:00Z"/></event>
        </trace></log>"#;
        let log = parse_xes(doc.as_bytes()).unwrap();
        assert_eq!(
            log.traces()[0].activities().collect::<Vec<_>>(),
            ["early", "late"]
        );
    }

    #[test]
    fn missing_timestamp_names_case() {
        let doc = r#"<log><trace><string key="concept:name" value="c42"/>
          <event><string key="concept:name" value="A"/></event></trace></log>"#;
        match parse_xes(doc.as_bytes()).unwrap_err() {
            Error::MissingAttribute { case_id, missing, .. } => {
                assert_eq!(case_id, "c42");
                assert_eq!(missing, "time:timestamp");
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn malformed_xml_has_line() {
        let doc = "<log>\n<trace>\n<event>\n</trace>\n</log>";
        match parse_xes(doc.as_bytes()).unwrap_err() {
            Error::Xml { line, .. } => assert!(line >= 3, "line {line}"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn start_lifecycle_events_are_skipped() {
        let doc = r#"<log><trace><string key="concept:name" value="c"/>
          <event><string key="concept:name" value="A"/><string key="lifecycle:transition" value="start"/><date key="time:timestamp" value="2020-01-01T09:00:00Z"/></event>
          <event><string key="concept:name" value="A"/><string key="lifecycle:transition" value="COMPLETE"/><date key="time:timestamp" value="2020-01-01T10:00:00Z"/></event>
        </trace></log>"#;
        let log = parse_xes(doc.as_bytes()).unwrap();
        assert_eq!(log.traces()[0].len(), 1);
    }

    #[test]
    fn nested_event_attributes_ignored() {
        let doc = r#"<log><trace><string key="concept:name" value="c"/>
          <event><string key="concept:name" value="A"/><date key="time:timestamp" value="2020-01-01T09:00:00Z"/>
            <list key="items"><string key="concept:name" value="nested"/></list></event>
        </trace></log>"#;
        let log = parse_xes(doc.as_bytes()).unwrap();
        assert_eq!(log.vocabulary().labels(), ["A"]);
    }
}
