//! Training-batch generation and fanout-limited computation graphs.

mod compgraph;
mod negative;
mod positive;
mod view;

use thiserror::Error;

pub use compgraph::{
    build_computation_graph, build_computation_graph_excluding, Block, ComputationGraph,
};
pub use negative::{negative_global_uniform, negative_per_source, NegativeScope};
pub use positive::{owned_train_edges, EpochPositives, PositiveSampler};
pub use view::{cache_mask, local_rows, sparsified_rows, GraphView, Locality, RemoteSource, Resolution};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SampleError {
    #[error("worker {worker} owns no training edges")]
    NoTrainEdges { worker: usize },
    #[error("node {node} is adjacent to every candidate destination")]
    NoNonNeighbor { node: usize },
    #[error("requested {requested} non-edges but only {available} exist")]
    InsufficientNonEdges { requested: usize, available: usize },
    #[error("fanouts must be positive, got {0:?}")]
    BadFanouts(Vec<usize>),
    #[error("seed node {node} is outside the view's {num_nodes} nodes")]
    Unresolvable { node: usize, num_nodes: usize },
}
