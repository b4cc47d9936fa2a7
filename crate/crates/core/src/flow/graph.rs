use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{cluster, Embedder, HashedTf, UtteranceVector};
use crate::dialog::Dialog;
use crate::error::{Error, Result};

pub const START_ID: &str = "START";
pub const END_ID: &str = "END";
pub const LABEL_CHARS: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowNode {
    pub id: String,
    /// Speaker whose utterances form this node; `None` for START/END.
    pub side: Option<String>,
    pub label: String,
    pub size: usize,
}

impl FlowNode {
    pub fn start(size: usize) -> Self {
        FlowNode {
            id: START_ID.into(),
            side: None,
            label: START_ID.into(),
            size,
        }
    }

    pub fn end(size: usize) -> Self {
        FlowNode {
            id: END_ID.into(),
            side: None,
            label: END_ID.into(),
            size,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowEdge {
    pub from: String,
    pub to: String,
    pub count: usize,
    pub probability: f64,
}

impl FlowEdge {
    pub fn new(from: &str, to: &str, count: usize, probability: f64) -> Self {
        FlowEdge {
            from: from.into(),
            to: to.into(),
            count,
            probability,
        }
    }
}

/// Action-transition graph. Nodes and edges are kept sorted by id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowGraph {
    pub nodes: Vec<FlowNode>,
    pub edges: Vec<FlowEdge>,
    /// Speaker sides in first-appearance order.
    pub sides: Vec<String>,
}

impl FlowGraph {
    pub fn from_parts(mut nodes: Vec<FlowNode>, mut edges: Vec<FlowEdge>) -> Self {
        let mut sides: Vec<String> = Vec::new();
        for side in nodes.iter().filter_map(|n| n.side.as_ref()) {
            if !sides.contains(side) {
                sides.push(side.clone());
            }
        }
        nodes.sort_by(|a, b| a.id.cmp(&b.id));
        edges.sort_by(|a, b| (&a.from, &a.to).cmp(&(&b.from, &b.to)));
        FlowGraph {
            nodes,
            edges,
            sides,
        }
    }

    pub fn node(&self, id: &str) -> Option<&FlowNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn edge(&self, from: &str, to: &str) -> Option<&FlowEdge> {
        self.edges.iter().find(|e| e.from == from && e.to == to)
    }

    pub fn outgoing<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a FlowEdge> + 'a {
        self.edges.iter().filter(move |e| e.from == id)
    }

    /// Checks that every node except END has outgoing probabilities summing
    /// to one within `tolerance`.
    pub fn check_normalized(&self, tolerance: f64) -> std::result::Result<(), String> {
        for node in self.nodes.iter().filter(|n| n.id != END_ID) {
            let total: f64 = self.outgoing(&node.id).map(|e| e.probability).sum();
            if (total - 1.0).abs() > tolerance {
                return Err(format!("node {} sums to {total}", node.id));
            }
        }
        Ok(())
    }
}

pub fn build_flow_graph(dialogs: &[Dialog], k: usize, seed: u64) -> Result<FlowGraph> {
    build_flow_graph_with(dialogs, k, seed, &HashedTf)
}

struct Occurrence<'a> {
    dialog: usize,
    turn: usize,
    text: &'a str,
}

/// Clusters utterances into actions per speaker side and counts the
/// transitions between them across the corpus.
///
/// The first speaker seen gets `ceil(k/2)` clusters and the second
/// `floor(k/2)`; a single-speaker corpus gets all `k`. Every dialog adds one
/// path `START -> ... -> END`.
pub fn build_flow_graph_with(
    dialogs: &[Dialog],
    k: usize,
    seed: u64,
    embedder: &dyn Embedder,
) -> Result<FlowGraph> {
    if dialogs.is_empty() {
        return Err(Error::Config("flow graph needs at least one dialog".into()));
    }
    let mut sides: Vec<&str> = Vec::new();
    for turn in dialogs.iter().flat_map(|d| &d.turns) {
        if !sides.contains(&turn.speaker.as_str()) {
            sides.push(&turn.speaker);
        }
    }
    if sides.len() > 2 {
        return Err(Error::Config(format!(
            "flow graphs need at most two speakers, found {}",
            sides.len()
        )));
    }
    let budgets: Vec<usize> = match sides.len() {
        2 => vec![k.div_ceil(2), k / 2],
        _ => vec![k],
    };
    if budgets.contains(&0) {
        return Err(Error::Config(format!(
            "k = {k} leaves a speaker side without clusters"
        )));
    }

    let mut cache: HashMap<&str, UtteranceVector> = HashMap::new();
    // node id per (dialog, turn)
    let mut node_of: HashMap<(usize, usize), String> = HashMap::new();
    let mut nodes = Vec::new();

    for (side_idx, (side, budget)) in sides.iter().zip(&budgets).enumerate() {
        let occurrences: Vec<Occurrence<'_>> = dialogs
            .iter()
            .enumerate()
            .flat_map(|(di, d)| {
                d.turns
                    .iter()
                    .enumerate()
                    .filter(|(_, t)| t.speaker == *side)
                    .map(move |(ti, t)| Occurrence {
                        dialog: di,
                        turn: ti,
                        text: &t.text,
                    })
            })
            .collect();
        let vectors: Vec<UtteranceVector> = occurrences
            .iter()
            .map(|o| {
                cache
                    .entry(o.text)
                    .or_insert_with(|| embedder.embed(o.text))
                    .clone()
            })
            .collect();
        let model = cluster(&vectors, *budget, seed)?;

        // Renumber clusters by first appearance so ids are stable and readable.
        let mut renumber: HashMap<usize, usize> = HashMap::new();
        for &c in &model.assignments {
            let next = renumber.len();
            renumber.entry(c).or_insert(next);
        }
        let prefix = (b'A' + side_idx as u8) as char;
        let id_of = |c: usize| format!("{prefix}{:03}", renumber[&c]);

        let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, &c) in model.assignments.iter().enumerate() {
            members.entry(renumber[&c]).or_default().push(i);
            node_of.insert((occurrences[i].dialog, occurrences[i].turn), id_of(c));
        }
        for (n, idxs) in members {
            let medoid = medoid(&idxs, &occurrences, &vectors);
            nodes.push(FlowNode {
                id: format!("{prefix}{n:03}"),
                side: Some(side.to_string()),
                label: medoid.chars().take(LABEL_CHARS).collect(),
                size: idxs.len(),
            });
        }
    }

    let mut counts: BTreeMap<(String, String), usize> = BTreeMap::new();
    for (di, d) in dialogs.iter().enumerate() {
        let mut prev = START_ID.to_string();
        for ti in 0..d.turns.len() {
            let node = node_of[&(di, ti)].clone();
            *counts.entry((prev, node.clone())).or_default() += 1;
            prev = node;
        }
        *counts.entry((prev, END_ID.to_string())).or_default() += 1;
    }
    let mut out_totals: HashMap<&str, usize> = HashMap::new();
    for ((from, _), n) in &counts {
        *out_totals.entry(from).or_default() += n;
    }
    let edges = counts
        .iter()
        .map(|((from, to), &n)| {
            FlowEdge::new(from, to, n, n as f64 / out_totals[from.as_str()] as f64)
        })
        .collect();

    nodes.push(FlowNode::start(dialogs.len()));
    nodes.push(FlowNode::end(dialogs.len()));
    let mut graph = FlowGraph::from_parts(nodes, edges);
    graph.sides = sides.iter().map(|s| s.to_string()).collect();
    Ok(graph)
}

/// Member text with the highest mean cosine to all members; the earliest
/// occurrence wins ties.
fn medoid<'a>(
    idxs: &[usize],
    occurrences: &[Occurrence<'a>],
    vectors: &[UtteranceVector],
) -> &'a str {
    // Distinct texts in first-occurrence order with their multiplicity.
    let mut distinct: Vec<(usize, usize)> = Vec::new();
    let mut pos: HashMap<&str, usize> = HashMap::new();
    for &i in idxs {
        match pos.get(occurrences[i].text) {
            Some(&p) => distinct[p].1 += 1,
            None => {
                pos.insert(occurrences[i].text, distinct.len());
                distinct.push((i, 1));
            }
        }
    }
    let total = idxs.len() as f64;
    let mut best = distinct[0].0;
    let mut best_score = f64::NEG_INFINITY;
    for &(i, _) in &distinct {
        let score: f64 = distinct
            .iter()
            .map(|&(j, n)| n as f64 * vectors[i].cosine(&vectors[j]))
            .sum::<f64>()
            / total;
        if score > best_score {
            best = i;
            best_score = score;
        }
    }
    occurrences[best].text
}
