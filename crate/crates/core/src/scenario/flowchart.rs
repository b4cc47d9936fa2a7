use std::collections::{HashMap, HashSet};
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{FlowEdge, FlowGraph, FlowNode, END_ID, START_ID};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowchartNode {
    pub id: String,
    pub label: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub entry: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowchartEdge {
    pub from: String,
    pub to: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// The procedure a wizard follows for one task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flowchart {
    pub task: String,
    pub nodes: Vec<FlowchartNode>,
    pub edges: Vec<FlowchartEdge>,
}

impl Flowchart {
    pub fn from_json(text: &str) -> Result<Self> {
        let chart: Flowchart =
            serde_json::from_str(text).map_err(|e| Error::InvalidFlowchart(e.to_string()))?;
        chart.validate()?;
        Ok(chart)
    }

    pub fn validate(&self) -> Result<()> {
        let mut ids = HashSet::new();
        for node in &self.nodes {
            if !ids.insert(node.id.as_str()) {
                return Err(Error::InvalidFlowchart(format!(
                    "duplicate node id {:?}",
                    node.id
                )));
            }
        }
        for edge in &self.edges {
            for end in [&edge.from, &edge.to] {
                if !ids.contains(end.as_str()) {
                    return Err(Error::InvalidFlowchart(format!(
                        "edge references unknown node {end:?}"
                    )));
                }
            }
        }
        match self.nodes.iter().filter(|n| n.entry).count() {
            1 => Ok(()),
            n => Err(Error::InvalidFlowchart(format!(
                "expected exactly one entry node, found {n}"
            ))),
        }
    }

    fn entry(&self) -> Option<usize> {
        self.nodes.iter().position(|n| n.entry)
    }

    fn outgoing(&self) -> Vec<Vec<(usize, Option<&str>)>> {
        let index: HashMap<&str, usize> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.as_str(), i))
            .collect();
        let mut out = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            if let (Some(&from), Some(&to)) = (index.get(e.from.as_str()), index.get(e.to.as_str()))
            {
                out[from].push((to, e.label.as_deref()));
            }
        }
        out
    }

    /// Numbered steps in depth-first order from the entry node.
    ///
    /// Each reachable node appears once. Edges into an already numbered step
    /// are written as notes under the step they leave from. Fails with
    /// [`Error::CyclicWithoutExit`] when no reachable step ends the
    /// procedure; [`Flowchart::edge_list`] is the fallback rendering.
    pub fn describe(&self) -> Result<String> {
        self.validate()?;
        let entry = self
            .entry()
            .ok_or_else(|| Error::InvalidFlowchart("no entry".into()))?;
        let out = self.outgoing();

        let mut walk = Walk {
            chart: self,
            out: &out,
            step: vec![None; self.nodes.len()],
            on_stack: vec![false; self.nodes.len()],
            next: 1,
            lines: Vec::new(),
            saw_terminal: false,
        };
        walk.visit(entry, None);
        if !walk.saw_terminal {
            return Err(Error::CyclicWithoutExit);
        }
        Ok(walk.lines.join("\n"))
    }

    /// One `from -> to` line per edge, in file order.
    pub fn edge_list(&self) -> String {
        let labels: HashMap<&str, &str> = self
            .nodes
            .iter()
            .map(|n| (n.id.as_str(), n.label.as_str()))
            .collect();
        let mut text = String::new();
        for e in &self.edges {
            let from = labels.get(e.from.as_str()).copied().unwrap_or(&e.from);
            let to = labels.get(e.to.as_str()).copied().unwrap_or(&e.to);
            let _ = write!(text, "{from} -> {to}");
            if let Some(label) = &e.label {
                let _ = write!(text, " [{label}]");
            }
            text.push('\n');
        }
        text
    }

    /// Graph view for DOT export: START feeds the entry node, terminal
    /// steps feed END, probabilities split evenly over out-edges.
    pub fn to_flow_graph(&self) -> FlowGraph {
        let out = self.outgoing();
        let mut nodes = vec![FlowNode::start(1), FlowNode::end(1)];
        nodes.extend(self.nodes.iter().map(|n| FlowNode {
            id: n.id.clone(),
            side: Some(self.task.clone()),
            label: n.label.clone(),
            size: 1,
        }));
        let mut edges = Vec::new();
        if let Some(entry) = self.entry() {
            edges.push(FlowEdge::new(START_ID, &self.nodes[entry].id, 1, 1.0));
        }
        for (i, targets) in out.iter().enumerate() {
            let from = &self.nodes[i].id;
            if targets.is_empty() {
                edges.push(FlowEdge::new(from, END_ID, 1, 1.0));
            }
            for &(to, _) in targets {
                edges.push(FlowEdge::new(
                    from,
                    &self.nodes[to].id,
                    1,
                    1.0 / targets.len() as f64,
                ));
            }
        }
        FlowGraph::from_parts(nodes, edges)
    }
}

struct Walk<'a> {
    chart: &'a Flowchart,
    out: &'a [Vec<(usize, Option<&'a str>)>],
    step: Vec<Option<usize>>,
    on_stack: Vec<bool>,
    next: usize,
    lines: Vec<String>,
    saw_terminal: bool,
}

impl Walk<'_> {
    fn visit(&mut self, node: usize, via: Option<&str>) {
        let n = self.next;
        self.next += 1;
        self.step[node] = Some(n);
        self.on_stack[node] = true;
        let mut line = format!("{n}. {}", self.chart.nodes[node].label);
        if let Some(label) = via {
            let _ = write!(line, " [if {label}]");
        }
        self.lines.push(line);

        let out = self.out;
        if out[node].is_empty() {
            self.saw_terminal = true;
        }
        for &(to, label) in &out[node] {
            if let Some(target) = self.step[to] {
                let verb = if self.on_stack[to] {
                    "back to"
                } else {
                    "continue at"
                };
                let note = match label {
                    Some(l) => format!("   (if {l}: {verb} step {target})"),
                    None => format!("   ({verb} step {target})"),
                };
                self.lines.push(note);
            }
        }
        for &(to, label) in &out[node] {
            if self.step[to].is_none() {
                self.visit(to, label);
            }
        }
        self.on_stack[node] = false;
    }
}
