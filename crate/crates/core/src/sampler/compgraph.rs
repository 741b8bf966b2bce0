use std::collections::{HashMap, HashSet};

use rand::seq::index;
use rand::Rng;

use super::view::{GraphView, Locality};
use super::SampleError;

/// Sampled edges from one frontier (destinations) to the next (sources).
/// Indices refer to positions in the respective layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    offsets: Vec<usize>,
    src: Vec<u32>,
    weights: Vec<f64>,
    num_src: usize,
}

impl Block {
    /// `offsets` has one entry per destination plus one; `src[offsets[i]..]`
    /// are destination `i`'s sampled sources.
    pub fn new(offsets: Vec<usize>, src: Vec<u32>, weights: Vec<f64>, num_src: usize) -> Self {
        assert_eq!(offsets.last(), Some(&src.len()));
        assert_eq!(src.len(), weights.len());
        assert!(src.iter().all(|&s| (s as usize) < num_src));
        Self {
            offsets,
            src,
            weights,
            num_src,
        }
    }

    pub fn num_dst(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn num_src(&self) -> usize {
        self.num_src
    }

    pub fn num_edges(&self) -> usize {
        self.src.len()
    }

    /// Source positions and edge weights sampled for destination `i`.
    #[inline]
    pub fn neighbors(&self, i: usize) -> (&[u32], &[f64]) {
        let r = self.offsets[i]..self.offsets[i + 1];
        (&self.src[r.clone()], &self.weights[r])
    }
}

/// Layered neighborhood expansion of a batch's endpoints.
///
/// `layers[0]` holds the seeds; `layers[k]` extends `layers[k − 1]` with the
/// new nodes sampled at hop `k`, so positions are stable across layers.
/// `blocks[k]` connects `layers[k]` (destinations) to `layers[k + 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComputationGraph {
    layers: Vec<Vec<u32>>,
    blocks: Vec<Block>,
    position: HashMap<u32, u32>,
    remote_nodes: Vec<u32>,
    remote_expanded: Vec<u32>,
    remote_edges: usize,
}

impl ComputationGraph {
    /// Assembles a graph from explicit layers and blocks (no locality data).
    pub fn from_parts(layers: Vec<Vec<u32>>, blocks: Vec<Block>) -> Self {
        assert_eq!(layers.len(), blocks.len() + 1);
        for (k, b) in blocks.iter().enumerate() {
            assert_eq!(b.num_dst(), layers[k].len());
            assert_eq!(b.num_src(), layers[k + 1].len());
            assert_eq!(&layers[k + 1][..layers[k].len()], &layers[k][..]);
        }
        let last = layers.last().expect("at least one layer");
        let position = last
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, i as u32))
            .collect();
        Self {
            layers,
            blocks,
            position,
            remote_nodes: Vec::new(),
            remote_expanded: Vec::new(),
            remote_edges: 0,
        }
    }

    /// Number of message-passing hops `K`.
    pub fn depth(&self) -> usize {
        self.blocks.len()
    }

    pub fn layers(&self) -> &[Vec<u32>] {
        &self.layers
    }

    pub fn seeds(&self) -> &[u32] {
        &self.layers[0]
    }

    /// Every node in the graph, i.e. the outermost layer.
    pub fn all_nodes(&self) -> &[u32] {
        self.layers.last().expect("at least one layer")
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Position of `v` in the layers, if present.
    pub fn position(&self, v: usize) -> Option<usize> {
        self.position.get(&(v as u32)).map(|&i| i as usize)
    }

    /// Nodes whose features are not stored on the worker, ascending.
    pub fn remote_nodes(&self) -> &[u32] {
        &self.remote_nodes
    }

    /// Nodes whose neighborhood came from the shared store, ascending.
    pub fn remote_expanded(&self) -> &[u32] {
        &self.remote_expanded
    }

    /// Sampled edges that came from the shared store.
    pub fn remote_edges(&self) -> usize {
        self.remote_edges
    }

    /// Resets every edge weight to 1.
    pub fn clear_weights(&mut self) {
        for b in &mut self.blocks {
            b.weights.iter_mut().for_each(|w| *w = 1.0);
        }
    }
}

/// Expands `seeds` hop by hop. At hop `k` every node of `layers[k]` samples
/// `min(fanouts[k], degree)` neighbors without replacement from its resolved
/// neighbor list. Duplicate seeds collapse to one position.
pub fn build_computation_graph(
    seeds: &[usize],
    view: &GraphView<'_>,
    fanouts: &[usize],
    rng: &mut impl Rng,
) -> Result<ComputationGraph, SampleError> {
    build_computation_graph_excluding(seeds, view, fanouts, &[], rng)
}

/// As [`build_computation_graph`], but the undirected edges in `exclude`
/// are never sampled, so a batch's target edges cannot leak into its own
/// message passing.
pub fn build_computation_graph_excluding(
    seeds: &[usize],
    view: &GraphView<'_>,
    fanouts: &[usize],
    exclude: &[(usize, usize)],
    rng: &mut impl Rng,
) -> Result<ComputationGraph, SampleError> {
    let mut banned: HashMap<u32, Vec<u32>> = HashMap::new();
    for &(u, v) in exclude {
        banned.entry(u as u32).or_default().push(v as u32);
        banned.entry(v as u32).or_default().push(u as u32);
    }
    let mut allowed = Vec::new();
    if fanouts.is_empty() || fanouts.contains(&0) {
        return Err(SampleError::BadFanouts(fanouts.to_vec()));
    }
    let n = view.num_nodes();
    let mut position: HashMap<u32, u32> = HashMap::with_capacity(seeds.len() * 4);
    let mut frontier: Vec<u32> = Vec::with_capacity(seeds.len());
    for &s in seeds {
        if s >= n {
            return Err(SampleError::Unresolvable {
                node: s,
                num_nodes: n,
            });
        }
        if let std::collections::hash_map::Entry::Vacant(e) = position.entry(s as u32) {
            e.insert(frontier.len() as u32);
            frontier.push(s as u32);
        }
    }

    let mut layers = vec![frontier.clone()];
    let mut blocks = Vec::with_capacity(fanouts.len());
    let mut remote_expanded = HashSet::new();
    let mut remote_edges = 0;
    let mut picked = Vec::new();
    for &fanout in fanouts {
        let dst = layers.last().expect("seed layer").clone();
        let mut next = dst.clone();
        let mut offsets = Vec::with_capacity(dst.len() + 1);
        offsets.push(0);
        let mut src = Vec::new();
        let mut weights = Vec::new();
        for &v in &dst {
            let r = view.resolve(v as usize);
            picked.clear();
            if let Some(ban) = banned.get(&v) {
                allowed.clear();
                allowed.extend((0..r.neighbors.len()).filter(|&i| !ban.contains(&r.neighbors[i])));
                let deg = allowed.len();
                if deg <= fanout {
                    picked.extend_from_slice(&allowed);
                } else {
                    picked.extend(index::sample(rng, deg, fanout).iter().map(|i| allowed[i]));
                    picked.sort_unstable();
                }
            } else {
                let deg = r.neighbors.len();
                if deg <= fanout {
                    picked.extend(0..deg);
                } else {
                    picked.extend(index::sample(rng, deg, fanout).iter());
                    picked.sort_unstable();
                }
            }
            if r.locality == Locality::Remote {
                remote_expanded.insert(v);
                remote_edges += picked.len();
            }
            for &i in &picked {
                let u = r.neighbors[i];
                let pos = *position.entry(u).or_insert_with(|| {
                    next.push(u);
                    (next.len() - 1) as u32
                });
                src.push(pos);
                weights.push(r.weights.map_or(1.0, |w| w[i]));
            }
            offsets.push(src.len());
        }
        blocks.push(Block::new(offsets, src, weights, next.len()));
        layers.push(next);
    }

    let mut remote_nodes: Vec<u32> = layers
        .last()
        .expect("layers")
        .iter()
        .copied()
        .filter(|&v| !view.features_cached(v as usize))
        .collect();
    remote_nodes.sort_unstable();
    let mut remote_expanded: Vec<u32> = remote_expanded.into_iter().collect();
    remote_expanded.sort_unstable();
    Ok(ComputationGraph {
        layers,
        blocks,
        position,
        remote_nodes,
        remote_expanded,
        remote_edges,
    })
}
