//! Undirected, feature-attributed graphs in symmetric CSR form.

mod generate;
mod io;
mod spectral;
mod split;

use std::collections::VecDeque;

use ndarray::Array2;
use thiserror::Error;

use crate::csr::Csr;
use crate::sampler::SampleError;
use crate::scalar::Real;

pub use generate::{generate_synthetic, SyntheticKind};
pub use io::{load_graph, write_graph};
pub use spectral::{laplacian_dense, normalized_laplacian_gamma, MAX_DENSE_NODES};
pub use split::{split_edges, EdgeSplit, SplitRatios};

/// Bytes used to store one feature value; ledger accounting uses the same unit.
pub const FEATURE_BYTES: u64 = 4;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("node id {node} out of range for {num_nodes} nodes")]
    NodeOutOfRange { node: usize, num_nodes: usize },
    #[error("feature row {row} has {found} columns, expected {expected}")]
    RaggedFeatures {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("feature matrix has {rows} rows but the graph has {num_nodes} nodes")]
    FeatureRowMismatch { rows: usize, num_nodes: usize },
    #[error("graph is empty")]
    Empty,
    #[error("vector length {found} does not match {expected} nodes")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("graph is disconnected")]
    Disconnected,
    #[error("dense oracle limited to {max} nodes, graph has {n}")]
    TooLarge { n: usize, max: usize },
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("split ratios {0:?} must be nonnegative and sum to 1")]
    InvalidRatios([f64; 3]),
    #[error("graph has {edges} edges, need at least {needed} to populate every split")]
    TooFewEdges { edges: usize, needed: usize },
    #[error("edge weight {0} is negative or not finite")]
    BadWeight(f64),
    #[error(transparent)]
    Sample(#[from] SampleError),
}

/// Immutable undirected graph with dense `f32` node features.
///
/// Neighbor lists are sorted, contain no self-loops or duplicates, and every
/// edge is stored in both directions with equal weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    adj: Csr,
    features: Array2<f32>,
}

impl Graph {
    /// Builds an unweighted graph. Self-loops are dropped, direction is
    /// discarded and repeated pairs are merged.
    pub fn from_edges(
        num_nodes: usize,
        edges: &[(usize, usize)],
        features: Array2<f32>,
    ) -> Result<Self, GraphError> {
        let weighted: Vec<_> = edges.iter().map(|&(u, v)| (u, v, 1.0)).collect();
        Self::build(num_nodes, &weighted, features, false)
    }

    /// Builds a weighted graph. Repeated pairs keep the weight of their first
    /// occurrence.
    pub fn from_weighted_edges(
        num_nodes: usize,
        edges: &[(usize, usize, f64)],
        features: Array2<f32>,
    ) -> Result<Self, GraphError> {
        Self::build(num_nodes, edges, features, true)
    }

    fn build(
        num_nodes: usize,
        edges: &[(usize, usize, f64)],
        features: Array2<f32>,
        weighted: bool,
    ) -> Result<Self, GraphError> {
        if num_nodes == 0 {
            return Err(GraphError::Empty);
        }
        if features.nrows() != num_nodes {
            return Err(GraphError::FeatureRowMismatch {
                rows: features.nrows(),
                num_nodes,
            });
        }
        let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); num_nodes];
        for &(u, v, w) in edges {
            for node in [u, v] {
                if node >= num_nodes {
                    return Err(GraphError::NodeOutOfRange { node, num_nodes });
                }
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(GraphError::BadWeight(w));
            }
            if u == v {
                continue;
            }
            rows[u].push((v as u32, w));
            rows[v].push((u as u32, w));
        }
        for row in &mut rows {
            // stable sort keeps the first occurrence of a pair ahead of repeats
            row.sort_by_key(|&(t, _)| t);
            row.dedup_by_key(|&mut (t, _)| t);
        }
        Ok(Self {
            adj: Csr::from_rows(rows, weighted),
            features,
        })
    }

    #[inline]
    pub fn num_nodes(&self) -> usize {
        self.adj.num_rows()
    }

    /// Number of undirected edges.
    #[inline]
    pub fn num_edges(&self) -> usize {
        self.adj.num_entries() / 2
    }

    /// Number of stored directed entries (twice the edge count).
    #[inline]
    pub fn num_entries(&self) -> usize {
        self.adj.num_entries()
    }

    #[inline]
    pub fn degree(&self, u: usize) -> usize {
        self.adj.row_len(u)
    }

    #[inline]
    pub fn neighbors(&self, u: usize) -> &[u32] {
        self.adj.row(u)
    }

    #[inline]
    pub fn neighbor_weights(&self, u: usize) -> Option<&[f64]> {
        self.adj.row_weights(u)
    }

    pub fn is_weighted(&self) -> bool {
        self.adj.is_weighted()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }

    /// Weight of edge `(u, v)`, if present.
    pub fn edge_weight(&self, u: usize, v: usize) -> Option<f64> {
        let i = self.neighbors(u).binary_search(&(v as u32)).ok()?;
        Some(self.neighbor_weights(u).map_or(1.0, |w| w[i]))
    }

    /// Undirected edges as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.num_nodes()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .map(|&v| v as usize)
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// Undirected edges with weights, same order as [`Graph::edges`].
    pub fn weighted_edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.num_nodes()).flat_map(move |u| {
            let w = self.neighbor_weights(u);
            self.neighbors(u)
                .iter()
                .enumerate()
                .filter(move |&(_, &v)| v as usize > u)
                .map(move |(i, &v)| (u, v as usize, w.map_or(1.0, |w| w[i])))
        })
    }

    pub fn csr(&self) -> &Csr {
        &self.adj
    }

    pub fn features(&self) -> &Array2<f32> {
        &self.features
    }

    pub fn feature_dim(&self) -> usize {
        self.features.ncols()
    }

    /// Same nodes and features, restricted to `edges`.
    pub fn edge_subgraph(&self, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        Self::from_edges(self.num_nodes(), edges, self.features.clone())
    }

    /// Induced subgraph on `nodes`; node `nodes[i]` becomes node `i`.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Result<Self, GraphError> {
        let mut relabel = vec![u32::MAX; self.num_nodes()];
        for (i, &u) in nodes.iter().enumerate() {
            relabel[u] = i as u32;
        }
        let mut edges = Vec::new();
        for (u, v, w) in self.weighted_edges() {
            let (a, b) = (relabel[u], relabel[v]);
            if a != u32::MAX && b != u32::MAX {
                edges.push((a as usize, b as usize, w));
            }
        }
        let features = self.features.select(ndarray::Axis(0), nodes);
        Self::build(nodes.len(), &edges, features, self.is_weighted())
    }

    /// Component label per node; labels are assigned in order of first node.
    pub fn connected_components(&self) -> Vec<u32> {
        let n = self.num_nodes();
        let mut label = vec![u32::MAX; n];
        let mut next = 0;
        let mut queue = VecDeque::new();
        for s in 0..n {
            if label[s] != u32::MAX {
                continue;
            }
            label[s] = next;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                for &v in self.neighbors(u) {
                    if label[v as usize] == u32::MAX {
                        label[v as usize] = next;
                        queue.push_back(v as usize);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn is_connected(&self) -> bool {
        self.connected_components().iter().all(|&c| c == 0)
    }

    /// Largest connected component, ties going to the component found first.
    /// Nodes keep their relative order.
    pub fn largest_component(&self) -> Result<Self, GraphError> {
        let labels = self.connected_components();
        let count = labels.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
        let mut sizes = vec![0usize; count];
        for &c in &labels {
            sizes[c as usize] += 1;
        }
        let best = (0..count).fold(0, |b, c| if sizes[c] > sizes[b] { c } else { b });
        let nodes: Vec<usize> = (0..labels.len())
            .filter(|&u| labels[u] as usize == best)
            .collect();
        self.induced_subgraph(&nodes)
    }

    /// `xᵀ L x = Σ_{(u,v)} w_uv (x_u − x_v)²`, evaluated edge by edge.
    pub fn laplacian_quadratic_form<T: Real>(&self, x: &[T]) -> Result<T, GraphError> {
        if x.len() != self.num_nodes() {
            return Err(GraphError::DimensionMismatch {
                expected: self.num_nodes(),
                found: x.len(),
            });
        }
        Ok(self
            .weighted_edges()
            .map(|(u, v, w)| {
                let d = x[u] - x[v];
                T::of(w) * d * d
            })
            .sum())
    }
}
