//! Action-transition graphs over dialog corpora.

mod dot;
mod embed;
mod graph;
mod kmeans;

pub use dot::flow_to_dot;
pub use embed::{cosine, embed, fnv1a, tokenize, Embedder, HashedTf, UtteranceVector, DIMENSION};
pub use graph::{
    build_flow_graph, build_flow_graph_with, FlowEdge, FlowGraph, FlowNode, END_ID, LABEL_CHARS,
    START_ID,
};
pub use kmeans::{cluster, ClusterModel, MAX_ITERATIONS};
