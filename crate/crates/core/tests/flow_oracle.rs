use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::PathBuf;

use dialogforge::flow::{
    build_flow_graph, cluster, embed, flow_to_dot, FlowGraph, END_ID, START_ID,
};
use dialogforge::Dialog;
use serde::Deserialize;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn corpus() -> Vec<Dialog> {
    let mut paths: Vec<_> = std::fs::read_dir(fixtures().join("flow_corpus"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| Dialog::from_file(p).unwrap())
        .collect()
}

#[derive(Deserialize)]
struct Bigram {
    from: String,
    to: String,
    count: usize,
}

/// Edge counts keyed by `speaker|text` of the node's medoid. With one
/// cluster per distinct string the medoid is that string.
fn edges_by_text(g: &FlowGraph) -> BTreeMap<(String, String), usize> {
    let name: HashMap<&str, String> = g
        .nodes
        .iter()
        .map(|n| {
            let key = match &n.side {
                Some(side) => format!("{side}|{}", n.label),
                None => n.id.clone(),
            };
            (n.id.as_str(), key)
        })
        .collect();
    g.edges
        .iter()
        .map(|e| {
            (
                (name[e.from.as_str()].clone(), name[e.to.as_str()].clone()),
                e.count,
            )
        })
        .collect()
}

#[test]
fn edge_counts_match_string_bigrams() {
    let dialogs = corpus();
    assert_eq!(dialogs.len(), 10);

    // Counted directly over the raw turns.
    let mut direct: BTreeMap<(String, String), usize> = BTreeMap::new();
    for d in &dialogs {
        let mut path = vec![START_ID.to_string()];
        path.extend(d.turns.iter().map(|t| format!("{}|{}", t.speaker, t.text)));
        path.push(END_ID.to_string());
        for w in path.windows(2) {
            *direct.entry((w[0].clone(), w[1].clone())).or_default() += 1;
        }
    }
    // Frozen by the external counting script.
    let frozen: Vec<Bigram> = serde_json::from_str(
        &std::fs::read_to_string(fixtures().join("flow_corpus_bigrams.json")).unwrap(),
    )
    .unwrap();
    let frozen: BTreeMap<_, _> = frozen
        .into_iter()
        .map(|b| ((b.from, b.to), b.count))
        .collect();
    assert_eq!(direct, frozen);

    let mut per_side: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for t in dialogs.iter().flat_map(|d| &d.turns) {
        per_side.entry(&t.speaker).or_default().insert(&t.text);
    }
    let k: usize = per_side.values().map(BTreeSet::len).sum();
    assert_eq!(k, 6);

    for seed in [0, 1, 42] {
        let g = build_flow_graph(&dialogs, k, seed).unwrap();
        assert_eq!(edges_by_text(&g), frozen, "seed {seed}");
        let start_out: usize = g.outgoing(START_ID).map(|e| e.count).sum();
        assert_eq!(start_out, 10);
        g.check_normalized(1e-9).unwrap();
    }
}

#[test]
fn dot_export_is_stable() {
    let dialogs = corpus();
    let a = flow_to_dot(&build_flow_graph(&dialogs, 6, 0).unwrap());
    let b = flow_to_dot(&build_flow_graph(&dialogs, 6, 0).unwrap());
    assert_eq!(a, b);
    assert!(a.starts_with("digraph flow {"));
    assert!(a.contains("\"START\" -> "));
}

#[test]
fn coarser_k_still_normalized() {
    let dialogs = corpus();
    for k in 2..=6 {
        let g = build_flow_graph(&dialogs, k, 7).unwrap();
        g.check_normalized(1e-9).unwrap();
        assert_eq!(g.nodes.len(), k + 2);
        let members: usize = g
            .nodes
            .iter()
            .filter(|n| n.side.is_some())
            .map(|n| n.size)
            .sum();
        assert_eq!(members, dialogs.iter().map(Dialog::len).sum::<usize>());
    }
    assert!(build_flow_graph(&dialogs, 7, 0).is_err());
}

#[test]
fn duplicated_groups_cluster_purely() {
    let texts = [
        "reset my password",
        "reset my password",
        "track my parcel",
        "track my parcel",
        "reset my password",
    ];
    let vectors: Vec<_> = texts.iter().map(|t| embed(t)).collect();
    for seed in 0..25 {
        let m = cluster(&vectors, 2, seed).unwrap();
        for i in 0..texts.len() {
            for j in 0..texts.len() {
                let same_text = texts[i] == texts[j];
                assert_eq!(
                    m.assignments[i] == m.assignments[j],
                    same_text,
                    "seed {seed}"
                );
                if m.assignments[i] == m.assignments[j] {
                    assert!((vectors[i].cosine(&vectors[j]) - 1.0).abs() < 1e-12);
                }
            }
        }
        assert_eq!(m, cluster(&vectors, 2, seed).unwrap());
    }
}
