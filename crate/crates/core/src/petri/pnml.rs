//! PNML (P/T net) import and export.
//!
//! Silent transitions are marked the way ProM and pm4py do it, with a
//! `toolspecific` element carrying `activity="$invisible$"`. Extra per-transition
//! attributes (used for stochastic annotations) go into a second
//! `toolspecific` element with `tool="spnknn"`.

use std::collections::HashMap;
use std::fmt::Write as _;

use quick_xml::escape::escape;
use quick_xml::events::{BytesStart, Event as XmlEvent};
use quick_xml::Reader;

use super::{Marking, NetBuilder, PetriNet};
use crate::error::{Error, Result};

pub const TOOL_NAME: &str = "spnknn";
const INVISIBLE: &str = "$invisible$";

/// Key/value attributes attached to each transition, by transition index.
pub type PnmlAnnotations = Vec<Vec<(String, String)>>;

pub fn write_pnml(net: &PetriNet, annotations: Option<&PnmlAnnotations>) -> String {
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<pnml>\n");
    s.push_str("  <net id=\"net\" type=\"http://www.pnml.org/version-2009/grammar/ptnet\">\n");
    s.push_str("    <page id=\"page\">\n");
    for p in 0..net.place_count() {
        let _ = write!(
            s,
            "      <place id=\"p{p}\"><name><text>{}</text></name>",
            escape(net.place_name(p))
        );
        let tokens = net.initial_marking().tokens(p);
        if tokens > 0 {
            let _ = write!(s, "<initialMarking><text>{tokens}</text></initialMarking>");
        }
        s.push_str("</place>\n");
    }
    for (i, t) in net.transitions().iter().enumerate() {
        let name = t.label.as_deref().unwrap_or(&t.name);
        let _ = write!(
            s,
            "      <transition id=\"t{i}\"><name><text>{}</text></name>",
            escape(name)
        );
        if t.is_silent() {
            let _ = write!(
                s,
                "<toolspecific tool=\"ProM\" version=\"6.4\" activity=\"{INVISIBLE}\" localNodeID=\"t{i}\"/>"
            );
        }
        if let Some(attrs) = annotations.and_then(|a| a.get(i)).filter(|a| !a.is_empty()) {
            let _ = write!(s, "<toolspecific tool=\"{TOOL_NAME}\" version=\"1\"");
            for (k, v) in attrs {
                let _ = write!(s, " {}=\"{}\"", k, escape(v.as_str()));
            }
            s.push_str("/>");
        }
        s.push_str("</transition>\n");
    }
    let mut arc = 0;
    for t in 0..net.transition_count() {
        for &p in net.preset(t) {
            let _ = writeln!(s, "      <arc id=\"a{arc}\" source=\"p{p}\" target=\"t{t}\"/>");
            arc += 1;
        }
        for &p in net.postset(t) {
            let _ = writeln!(s, "      <arc id=\"a{arc}\" source=\"t{t}\" target=\"p{p}\"/>");
            arc += 1;
        }
    }
    s.push_str("    </page>\n    <finalmarkings>\n      <marking>\n");
    for p in 0..net.place_count() {
        let tokens = net.final_marking().tokens(p);
        if tokens > 0 {
            let _ = writeln!(
                s,
                "        <place idref=\"p{p}\"><text>{tokens}</text></place>"
            );
        }
    }
    s.push_str("      </marking>\n    </finalmarkings>\n  </net>\n</pnml>\n");
    s
}

#[derive(Default)]
struct RawTransition {
    id: String,
    name: Option<String>,
    invisible: bool,
    attrs: Vec<(String, String)>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Ctx {
    Place,
    Transition,
    FinalPlace,
    Other,
}

fn attributes(e: &BytesStart<'_>) -> Result<Vec<(String, String)>> {
    e.attributes()
        .map(|a| {
            let a = a.map_err(|e| Error::Pnml(e.to_string()))?;
            let k = String::from_utf8_lossy(a.key.as_ref()).into_owned();
            let v = a
                .unescape_value()
                .map_err(|e| Error::Pnml(e.to_string()))?
                .into_owned();
            Ok((k, v))
        })
        .collect()
}

fn attr<'a>(attrs: &'a [(String, String)], key: &str) -> Option<&'a str> {
    attrs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
}

/// Reads a PNML document into a net plus the `spnknn` tool-specific attributes.
pub fn read_pnml(source: &[u8]) -> Result<(PetriNet, PnmlAnnotations)> {
    let mut reader = Reader::from_reader(source);
    reader.config_mut().trim_text(true);
    let mut buf = Vec::new();

    let mut places: Vec<(String, String, u32)> = Vec::new();
    let mut transitions: Vec<RawTransition> = Vec::new();
    let mut arcs: Vec<(String, String)> = Vec::new();
    let mut finals: Vec<(String, u32)> = Vec::new();
    let mut has_final_section = false;

    let mut stack: Vec<(Vec<u8>, Ctx)> = Vec::new();
    loop {
        let ev = reader
            .read_event_into(&mut buf)
            .map_err(|e| Error::Pnml(format!("at byte {}: {e}", reader.error_position())))?;
        let ctx = stack
            .iter()
            .rev()
            .map(|(_, c)| *c)
            .find(|c| *c != Ctx::Other)
            .unwrap_or(Ctx::Other);
        match ev {
            XmlEvent::Start(ref e) | XmlEvent::Empty(ref e) => {
                let is_start = matches!(ev, XmlEvent::Start(_));
                let tag = e.local_name().as_ref().to_vec();
                let attrs = attributes(e)?;
                let mut new_ctx = Ctx::Other;
                match tag.as_slice() {
                    b"place" if stack.iter().any(|(t, _)| t == b"marking") => {
                        finals.push((attr(&attrs, "idref").unwrap_or_default().to_string(), 0));
                        new_ctx = Ctx::FinalPlace;
                    }
                    b"place" => {
                        let id = attr(&attrs, "id").unwrap_or_default().to_string();
                        places.push((id.clone(), id, 0));
                        new_ctx = Ctx::Place;
                    }
                    b"transition" => {
                        transitions.push(RawTransition {
                            id: attr(&attrs, "id").unwrap_or_default().to_string(),
                            ..Default::default()
                        });
                        new_ctx = Ctx::Transition;
                    }
                    b"arc" => arcs.push((
                        attr(&attrs, "source").unwrap_or_default().to_string(),
                        attr(&attrs, "target").unwrap_or_default().to_string(),
                    )),
                    b"finalmarkings" => has_final_section = true,
                    b"toolspecific" if ctx == Ctx::Transition => {
                        let t = transitions.last_mut().expect("inside transition");
                        if attr(&attrs, "activity") == Some(INVISIBLE) {
                            t.invisible = true;
                        }
                        if attr(&attrs, "tool") == Some(TOOL_NAME) {
                            t.attrs = attrs
                                .into_iter()
                                .filter(|(k, _)| k != "tool" && k != "version")
                                .collect();
                        }
                    }
                    _ => {}
                }
                if is_start {
                    stack.push((tag, new_ctx));
                }
            }
            XmlEvent::Text(t) => {
                let text = t
                    .unescape()
                    .map_err(|e| Error::Pnml(e.to_string()))?
                    .into_owned();
                let path: Vec<&[u8]> = stack.iter().map(|(t, _)| t.as_slice()).collect();
                let in_name = path.ends_with(&[b"name", b"text"]);
                let in_marking = path.ends_with(&[b"initialMarking", b"text"]);
                match ctx {
                    Ctx::Place if in_name => places.last_mut().expect("place").1 = text,
                    Ctx::Place if in_marking => {
                        places.last_mut().expect("place").2 = parse_count(&text)?
                    }
                    Ctx::Transition if in_name => {
                        transitions.last_mut().expect("transition").name = Some(text)
                    }
                    Ctx::FinalPlace if path.ends_with(&[b"text"]) => {
                        finals.last_mut().expect("final place").1 = parse_count(&text)?
                    }
                    _ => {}
                }
            }
            XmlEvent::End(_) => {
                stack.pop();
            }
            XmlEvent::Eof => break,
            _ => {}
        }
        buf.clear();
    }

    let mut b = NetBuilder::new();
    let mut place_ix = HashMap::new();
    for (id, name, _) in &places {
        place_ix.insert(id.clone(), b.place(name.clone()));
    }
    let mut trans_ix = HashMap::new();
    for t in &transitions {
        let name = t.name.clone().unwrap_or_else(|| t.id.clone());
        let label = (!t.invisible).then_some(name.as_str());
        trans_ix.insert(t.id.clone(), b.transition(name.clone(), label));
    }
    for (src, dst) in &arcs {
        match (
            place_ix.get(src),
            trans_ix.get(src),
            place_ix.get(dst),
            trans_ix.get(dst),
        ) {
            (Some(&p), _, _, Some(&t)) => {
                b.input(p, t);
            }
            (_, Some(&t), Some(&p), _) => {
                b.output(t, p);
            }
            _ => {
                return Err(Error::Pnml(format!(
                    "arc {src} -> {dst} must connect a place and a transition"
                )))
            }
        }
    }
    let n = places.len();
    let initial = Marking::from_counts(places.iter().map(|p| p.2).collect());
    let mut final_counts = vec![0; n];
    for (idref, c) in &finals {
        let &p = place_ix
            .get(idref)
            .ok_or_else(|| Error::Pnml(format!("final marking refers to unknown place {idref}")))?;
        final_counts[p] += c;
    }
    let mut net_final = Marking::from_counts(final_counts);
    if !has_final_section {
        let probe = b.clone().build(initial.clone(), Marking::empty(n))?;
        if let [sink] = probe.sinks()[..] {
            net_final = Marking::with_token(n, sink);
        }
    }
    let annotations = transitions.into_iter().map(|t| t.attrs).collect();
    Ok((b.build(initial, net_final)?, annotations))
}

fn parse_count(s: &str) -> Result<u32> {
    s.trim()
        .parse()
        .map_err(|_| Error::Pnml(format!("invalid token count '{s}'")))
}
