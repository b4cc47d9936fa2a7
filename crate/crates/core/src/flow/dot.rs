use std::fmt::Write;

use super::{FlowGraph, FlowNode, END_ID, START_ID};

const SIDE_SHAPES: [&str; 2] = ["box", "ellipse"];

/// Renders `graph` as a DOT digraph.
///
/// Nodes and edges come out in id order. Each speaker side gets its own
/// shape; edges are labeled `count (probability)` with two decimals.
pub fn flow_to_dot(graph: &FlowGraph) -> String {
    let mut out = String::from("digraph flow {\n    rankdir=LR;\n");

    let mut nodes: Vec<&FlowNode> = graph.nodes.iter().collect();
    nodes.sort_by(|a, b| a.id.cmp(&b.id));
    for id in [START_ID, END_ID] {
        if !nodes.iter().any(|n| n.id == id) {
            let _ = writeln!(
                out,
                "    \"{id}\" [shape={}, label=\"{id}\"];",
                shape_of(graph, None, id)
            );
        }
    }
    for node in nodes {
        let label = if node.side.is_some() {
            format!(
                "{}\\n{} (n={})",
                escape(&node.id),
                escape(&node.label),
                node.size
            )
        } else {
            escape(&node.label)
        };
        let _ = writeln!(
            out,
            "    \"{}\" [shape={}, label=\"{label}\"];",
            escape(&node.id),
            shape_of(graph, node.side.as_deref(), &node.id)
        );
    }

    let mut edges: Vec<_> = graph.edges.iter().collect();
    edges.sort_by(|a, b| (&a.from, &a.to).cmp(&(&b.from, &b.to)));
    for e in edges {
        let _ = writeln!(
            out,
            "    \"{}\" -> \"{}\" [label=\"{} ({:.2})\"];",
            escape(&e.from),
            escape(&e.to),
            e.count,
            e.probability
        );
    }
    out.push_str("}\n");
    out
}

fn shape_of(graph: &FlowGraph, side: Option<&str>, id: &str) -> &'static str {
    match (side, id) {
        (None, END_ID) => "doublecircle",
        (None, _) => "circle",
        (Some(s), _) => {
            let idx = graph.sides.iter().position(|x| x == s).unwrap_or(0);
            SIDE_SHAPES[idx % SIDE_SHAPES.len()]
        }
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => {}
            c => out.push(c),
        }
    }
    out
}
