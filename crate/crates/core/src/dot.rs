//! Graphviz export of attack structures.
//!
//! Environment states render as rectangles and attack states as circles.
//! Color classes follow the diagnostics convention used throughout:
//! attack-revealing states red, positive detected states green,
//! undetectable states blue, negative detected states gray.

use std::fmt::Write;

use crate::document::{NodeDecl, StructureDocument};

fn escape(text: &str) -> String {
    text.replace('\\', "\\\\").replace('"', "\\\"")
}

fn set_label(items: &[String]) -> String {
    format!("{{{}}}", items.join(","))
}

fn pair_label(items: &[(String, String)]) -> String {
    let parts: Vec<String> = items.iter().map(|(a, b)| format!("({a},{b})")).collect();
    format!("{{{}}}", parts.join(","))
}

fn node_color(node: &NodeDecl) -> Option<&'static str> {
    if node.attack_revealing == Some(true) {
        return Some("red");
    }
    match node.label.as_deref() {
        Some("positive_detected") => Some("green"),
        Some("undetectable") => Some("blue"),
        Some("negative_detected") => Some("gray"),
        _ => None,
    }
}

/// Render an action label the way the structures draw doctored events: a
/// hat on the delivered event, a hatted epsilon for erasures.
fn action_label(label: &str) -> String {
    match label.strip_prefix("fwd:") {
        Some(event) => format!("{event}\u{0302}"),
        None if label == "erase" => "\u{03b5}\u{0302}".to_string(),
        None => label.to_string(),
    }
}

/// Render a structure document as a Graphviz digraph.
pub fn structure_to_dot(doc: &StructureDocument) -> String {
    let mut out = String::new();
    writeln!(out, "digraph {} {{", doc.kind).unwrap();
    writeln!(out, "    rankdir=TB;").unwrap();
    writeln!(out, "    __start [shape=point label=\"\"];").unwrap();
    for node in &doc.nodes {
        let (shape, text) = if node.kind == "attack" {
            (
                "circle",
                format!(
                    "{}\\n{}\\n{} | {}",
                    set_label(&node.supervisor_estimate),
                    pair_label(&node.attacker_estimate),
                    node.z,
                    node.event.as_deref().unwrap_or("?"),
                ),
            )
        } else {
            (
                "box",
                format!(
                    "{}\\n{}\\n{}",
                    set_label(&node.supervisor_estimate),
                    pair_label(&node.attacker_estimate),
                    node.z,
                ),
            )
        };
        let mut attrs = format!("shape={shape} label=\"{}\"", escape(&text));
        if let Some(color) = node_color(node) {
            write!(attrs, " color={color} penwidth=2").unwrap();
        }
        writeln!(out, "    {} [{}];", node.id, attrs).unwrap();
    }
    writeln!(out, "    __start -> {};", doc.initial).unwrap();
    for edge in &doc.edges {
        let label = if edge.from.starts_with('a') {
            action_label(&edge.label)
        } else {
            edge.label.clone()
        };
        writeln!(
            out,
            "    {} -> {} [label=\"{}\"];",
            edge.from,
            edge.to,
            escape(&label)
        )
        .unwrap();
    }
    writeln!(out, "}}").unwrap();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aas::build_aas;
    use crate::classify::simplify;
    use crate::document::{structure_from_aas, structure_from_sas};
    use crate::fixtures;
    use crate::synthesis::extract_sas;
    use std::collections::BTreeSet;

    fn secret() -> BTreeSet<String> {
        BTreeSet::from(["1".to_string()])
    }

    #[test]
    fn dot_marks_shapes_and_colors() {
        let aas = build_aas(&fixtures::plant_g(), &fixtures::supervisor_h()).unwrap();
        let saas = simplify(&aas, &secret()).unwrap();
        let dot = structure_to_dot(&structure_from_aas(&saas));
        assert!(dot.starts_with("digraph saas {"));
        assert!(dot.contains("shape=box"));
        assert!(dot.contains("shape=circle"));
        assert!(dot.contains("color=red"));
        assert!(dot.contains("color=green"));
        assert!(dot.contains("color=blue"));
        assert!(dot.contains("\u{03b5}\u{0302}"));
        assert!(dot.trim_end().ends_with('}'));
    }

    #[test]
    fn dot_is_deterministic() {
        let aas = build_aas(&fixtures::plant_g(), &fixtures::supervisor_h()).unwrap();
        let saas = simplify(&aas, &secret()).unwrap();
        let sas = extract_sas(&saas, &secret()).unwrap().unwrap();
        let doc = structure_from_sas(&sas);
        assert_eq!(structure_to_dot(&doc), structure_to_dot(&doc));
    }
}
