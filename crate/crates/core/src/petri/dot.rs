use std::fmt::Write as _;

use super::PetriNet;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz rendering; `extra` adds a second label line per transition.
pub fn to_dot(net: &PetriNet, extra: Option<&dyn Fn(usize) -> Option<String>>) -> String {
    let mut s = String::from("digraph petrinet {\n  rankdir=LR;\n");
    for p in 0..net.place_count() {
        let tokens = net.initial_marking().tokens(p);
        let label = if tokens > 0 {
            format!("{tokens}")
        } else {
            String::new()
        };
        let peripheries = if net.final_marking().tokens(p) > 0 { 2 } else { 1 };
        let _ = writeln!(
            s,
            "  p{p} [shape=circle, label={}, xlabel={}, peripheries={peripheries}];",
            quote(&label),
            quote(net.place_name(p))
        );
    }
    for (i, t) in net.transitions().iter().enumerate() {
        let mut label = t.label.clone().unwrap_or_default();
        if let Some(line) = extra.and_then(|f| f(i)) {
            label = if label.is_empty() { line } else { format!("{label}\n{line}") };
        }
        let style = if t.is_silent() {
            "style=filled, fillcolor=black, fontcolor=white, width=0.15"
        } else {
            "style=solid"
        };
        let _ = writeln!(s, "  t{i} [shape=box, {style}, label={}];", quote(&label));
    }
    for t in 0..net.transition_count() {
        for &p in net.preset(t) {
            let _ = writeln!(s, "  p{p} -> t{t};");
        }
        for &p in net.postset(t) {
            let _ = writeln!(s, "  t{t} -> p{p};");
        }
    }
    s.push_str("}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::sequence_ab;
    use super::*;

    #[test]
    fn renders_nodes_and_arcs() {
        let dot = to_dot(&sequence_ab(), None);
        assert!(dot.starts_with("digraph"));
        assert!(dot.contains("p0 -> t0;"));
        assert!(dot.contains("t1 -> p2;"));
        assert!(dot.contains("label=\"B\""));
    }
}
