//! Degree-based effective-resistance sampling of partition subgraphs.
//!
//! Each partition draws `L = max(1, round(α·|E|))` edges with replacement,
//! edge `(u, v)` with probability proportional to `1/d_u + 1/d_v`. Every draw
//! adds `1 / (L · p_e)` to the drawn edge's weight, so the expected weighted
//! Laplacian of the output equals the input Laplacian.

mod oracle;

use std::io::Write;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use thiserror::Error;

use crate::graph::{laplacian_dense, Graph, GraphError};
use crate::partition::WorkerSubgraph;
use crate::scalar::Real;
use crate::seed::derive_seed;

pub use oracle::{
    exact_effective_resistance, resistance_bounds_hold, spectral_closeness, BoundsCheck,
    ClosenessCheck, ResistanceOracle, BOUNDS_TOLERANCE,
};

/// Largest graph the pseudo-inverse oracle accepts.
pub const MAX_ORACLE_NODES: usize = 500;
/// Largest graph [`expected_laplacian_error`] accepts.
pub const MAX_MONTE_CARLO_NODES: usize = 200;

#[derive(Debug, Error)]
pub enum SparsifyError {
    #[error("alpha must be positive and finite, got {0}")]
    InvalidAlpha(f64),
    #[error("subgraph has no edges to sample")]
    EmptyEdgeSet,
    #[error("node {node} has degree zero")]
    ZeroDegree { node: usize },
    #[error("graph is disconnected")]
    Disconnected,
    #[error("oracle limited to {max} nodes, graph has {n}")]
    TooLarge { n: usize, max: usize },
    #[error("trial count {0} below the minimum of 100")]
    TooFewTrials(usize),
    #[error("sampling probabilities are invalid: {0}")]
    BadProbabilities(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Which degrees feed the importance scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DegreeSource {
    /// Degrees inside the partition subgraph (owned plus halo edges).
    #[default]
    Local,
    /// Degrees in the full graph.
    Global,
}

/// `1/d_u + 1/d_v`, the degree proxy for an edge's effective resistance.
pub fn approx_resistance<T: Real>(d_u: usize, d_v: usize) -> Result<T, SparsifyError> {
    if d_u == 0 || d_v == 0 {
        return Err(SparsifyError::ZeroDegree {
            node: if d_u == 0 { 0 } else { 1 },
        });
    }
    Ok(T::one() / T::of_usize(d_u) + T::one() / T::of_usize(d_v))
}

/// Normalized sampling probabilities over `g.edges()` (in that order).
pub fn edge_probabilities<T: Real>(
    g: &Graph,
    degree: impl Fn(usize) -> usize,
) -> Result<Vec<T>, SparsifyError> {
    let mut scores = Vec::with_capacity(g.num_edges());
    for (u, v) in g.edges() {
        let s = approx_resistance::<T>(degree(u), degree(v)).map_err(|_| {
            SparsifyError::ZeroDegree {
                node: if degree(u) == 0 { u } else { v },
            }
        })?;
        scores.push(s);
    }
    if scores.is_empty() {
        return Err(SparsifyError::EmptyEdgeSet);
    }
    let z: T = scores.iter().copied().sum();
    Ok(scores.into_iter().map(|s| s / z).collect())
}

/// Number of draws for a subgraph with `num_edges` edges.
pub fn sample_count(alpha: f64, num_edges: usize) -> usize {
    ((alpha * num_edges as f64).round() as usize).max(1)
}

/// Outcome of importance sampling: the distinct drawn indices in ascending
/// order, how often each was drawn, and its accumulated weight.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceSample<T> {
    pub index: Vec<usize>,
    pub draws: Vec<u32>,
    pub weights: Vec<T>,
}

/// Draws `draws` items with replacement from `probs`; each draw adds
/// `1 / (draws · p)` to the item's weight.
pub fn importance_sample<T: Real>(
    probs: &[T],
    draws: usize,
    seed: u64,
) -> Result<ImportanceSample<T>, SparsifyError> {
    if probs.is_empty() {
        return Err(SparsifyError::EmptyEdgeSet);
    }
    let table = WeightedAliasIndex::new(probs.to_vec())
        .map_err(|e| SparsifyError::BadProbabilities(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = T::of_usize(draws);
    let mut count = vec![0u32; probs.len()];
    let mut weight = vec![T::zero(); probs.len()];
    for _ in 0..draws {
        let e = table.sample(&mut rng);
        let w = T::one() / (total * probs[e]);
        if count[e] == 0 {
            weight[e] = w;
        } else {
            weight[e] = weight[e] + w;
        }
        count[e] += 1;
    }
    let index: Vec<usize> = (0..probs.len()).filter(|&e| count[e] > 0).collect();
    Ok(ImportanceSample {
        draws: index.iter().map(|&e| count[e]).collect(),
        weights: index.iter().map(|&e| weight[e]).collect(),
        index,
    })
}

/// A partition's sparsified edge set. Node set and feature rows are those of
/// the source subgraph; edges are stored with global ids.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsifiedSubgraph<T> {
    part_id: usize,
    nodes: Vec<u32>,
    edges: Vec<(u32, u32)>,
    weights: Vec<T>,
    draws: Vec<u32>,
    probabilities: Vec<T>,
    source_edge_count: usize,
    samples_drawn: usize,
}

impl<T: Real> SparsifiedSubgraph<T> {
    pub fn part_id(&self) -> usize {
        self.part_id
    }

    /// Global ids of the node set (identical to the source subgraph's).
    pub fn nodes(&self) -> &[u32] {
        &self.nodes
    }

    /// Distinct retained edges as global id pairs.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Times each retained edge was drawn.
    pub fn draws(&self) -> &[u32] {
        &self.draws
    }

    /// Sampling probability of each retained edge.
    pub fn probabilities(&self) -> &[T] {
        &self.probabilities
    }

    /// `|E^i|` of the source subgraph.
    pub fn source_edge_count(&self) -> usize {
        self.source_edge_count
    }

    /// `L^i`, the number of draws.
    pub fn samples_drawn(&self) -> usize {
        self.samples_drawn
    }

    pub fn retained(&self) -> usize {
        self.edges.len()
    }

    pub fn retention_ratio(&self) -> f64 {
        self.edges.len() as f64 / self.source_edge_count as f64
    }

    /// One-line description: `|E|`, `L`, distinct retained edges, ratio.
    pub fn summary(&self) -> String {
        format!(
            "part={} source_edges={} samples={} retained={} retention={:.4}",
            self.part_id,
            self.source_edge_count,
            self.samples_drawn,
            self.retained(),
            self.retention_ratio()
        )
    }

    /// Writes `u,v,weight` rows under a header line.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "u,v,weight")?;
        for (&(u, v), w) in self.edges.iter().zip(&self.weights) {
            writeln!(out, "{u},{v},{}", w.as_f64())?;
        }
        Ok(())
    }
}

fn check_alpha(alpha: f64) -> Result<(), SparsifyError> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(SparsifyError::InvalidAlpha(alpha))
    }
}

/// Sparsifies a partition subgraph with subgraph-local degrees.
pub fn sparsify_subgraph<T: Real>(
    sub: &WorkerSubgraph,
    alpha: f64,
    seed: u64,
) -> Result<SparsifiedSubgraph<T>, SparsifyError> {
    sparsify_subgraph_with(sub, alpha, DegreeSource::Local, None, seed)
}

/// Sparsifies with a choice of degree source. `full` must be given when
/// `degrees` is [`DegreeSource::Global`].
pub fn sparsify_subgraph_with<T: Real>(
    sub: &WorkerSubgraph,
    alpha: f64,
    degrees: DegreeSource,
    full: Option<&Graph>,
    seed: u64,
) -> Result<SparsifiedSubgraph<T>, SparsifyError> {
    check_alpha(alpha)?;
    let local = sub.local();
    let probs: Vec<T> = match (degrees, full) {
        (DegreeSource::Global, Some(g)) => edge_probabilities(local, |l| g.degree(sub.to_global(l)))?,
        (DegreeSource::Global, None) => {
            return Err(SparsifyError::BadProbabilities(
                "global degrees requested without the full graph".into(),
            ))
        }
        (DegreeSource::Local, _) => edge_probabilities(local, |l| local.degree(l))?,
    };
    let source_edges: Vec<(usize, usize)> = local.edges().collect();
    let draws = sample_count(alpha, source_edges.len());
    let sample = importance_sample(&probs, draws, seed)?;
    let edges = sample
        .index
        .iter()
        .map(|&e| {
            let (a, b) = source_edges[e];
            (sub.to_global(a) as u32, sub.to_global(b) as u32)
        })
        .collect();
    Ok(SparsifiedSubgraph {
        part_id: sub.part_id(),
        nodes: sub.local_to_global().to_vec(),
        edges,
        probabilities: sample.index.iter().map(|&e| probs[e]).collect(),
        weights: sample.weights,
        draws: sample.draws,
        source_edge_count: source_edges.len(),
        samples_drawn: draws,
    })
}

/// Sparsifies a whole graph in its own ids; returns `(u, v, weight)` triples.
pub fn sparsify_graph<T: Real>(
    g: &Graph,
    alpha: f64,
    seed: u64,
) -> Result<Vec<(usize, usize, T)>, SparsifyError> {
    check_alpha(alpha)?;
    let probs: Vec<T> = edge_probabilities(g, |u| g.degree(u))?;
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let sample = importance_sample(&probs, sample_count(alpha, edges.len()), seed)?;
    Ok(sample
        .index
        .iter()
        .zip(sample.weights)
        .map(|(&e, w)| (edges[e].0, edges[e].1, w))
        .collect())
}

/// Relative Frobenius distance between the trial-averaged sparsified
/// Laplacian and the Laplacian of `g`, sparsifying with [`sparsify_graph`].
pub fn expected_laplacian_error(
    g: &Graph,
    alpha: f64,
    trials: usize,
    seed: u64,
) -> Result<f64, SparsifyError> {
    expected_laplacian_error_with(g, trials, |trial| {
        sparsify_graph::<f64>(g, alpha, derive_seed(seed, &[trial as u64]))
    })
}

/// [`expected_laplacian_error`] with a caller-supplied sparsifier, called
/// once per trial index.
pub fn expected_laplacian_error_with<F>(
    g: &Graph,
    trials: usize,
    mut sparsify: F,
) -> Result<f64, SparsifyError>
where
    F: FnMut(usize) -> Result<Vec<(usize, usize, f64)>, SparsifyError>,
{
    let n = g.num_nodes();
    if n > MAX_MONTE_CARLO_NODES {
        return Err(SparsifyError::TooLarge {
            n,
            max: MAX_MONTE_CARLO_NODES,
        });
    }
    if trials < 100 {
        return Err(SparsifyError::TooFewTrials(trials));
    }
    if g.num_edges() == 0 {
        return Err(SparsifyError::EmptyEdgeSet);
    }
    let mut acc = DMatrix::<f64>::zeros(n, n);
    for trial in 0..trials {
        for (u, v, w) in sparsify(trial)? {
            acc[(u, v)] -= w;
            acc[(v, u)] -= w;
            acc[(u, u)] += w;
            acc[(v, v)] += w;
        }
    }
    acc /= trials as f64;
    let l = laplacian_dense(g);
    Ok((acc - &l).norm() / l.norm())
}
