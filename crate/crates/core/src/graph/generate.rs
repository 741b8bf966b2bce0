//! Seeded synthetic graph generators.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Graph, GraphError};

#[derive(Debug, Clone, PartialEq)]
pub enum SyntheticKind {
    /// G(n, p).
    ErdosRenyi { n: usize, p: f64 },
    /// Preferential attachment, `m` edges per arriving node, seeded by a
    /// clique on `m + 1` nodes.
    BarabasiAlbert { n: usize, m: usize },
    /// Stochastic block model with the given block sizes.
    Sbm {
        block_sizes: Vec<usize>,
        p_in: f64,
        p_out: f64,
    },
}

fn check_prob(name: &str, p: f64, allow_zero: bool) -> Result<(), GraphError> {
    let ok = p <= 1.0 && if allow_zero { p >= 0.0 } else { p > 0.0 };
    if ok {
        Ok(())
    } else {
        Err(GraphError::InvalidParams(format!("{name} = {p} out of range")))
    }
}

/// Generates a graph of the requested kind and returns its largest connected
/// component with i.i.d. `U[-1, 1]` features. Deterministic in `seed`.
pub fn generate_synthetic(
    kind: &SyntheticKind,
    feature_dim: usize,
    seed: u64,
) -> Result<Graph, GraphError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, edges) = match *kind {
        SyntheticKind::ErdosRenyi { n, p } => {
            check_prob("p", p, false)?;
            (n, erdos_renyi(n, p, &mut rng))
        }
        SyntheticKind::BarabasiAlbert { n, m } => {
            if m == 0 || m >= n {
                return Err(GraphError::InvalidParams(format!(
                    "barabasi_albert needs 1 <= m < n, got m = {m}, n = {n}"
                )));
            }
            (n, barabasi_albert(n, m, &mut rng))
        }
        SyntheticKind::Sbm {
            ref block_sizes,
            p_in,
            p_out,
        } => {
            check_prob("p_in", p_in, false)?;
            check_prob("p_out", p_out, true)?;
            (block_sizes.iter().sum(), sbm(block_sizes, p_in, p_out, &mut rng))
        }
    };
    if n < 2 {
        return Err(GraphError::InvalidParams(format!(
            "need at least 2 nodes, got {n}"
        )));
    }
    let skeleton = Graph::from_edges(n, &edges, Array2::zeros((n, 0)))?.largest_component()?;
    if skeleton.num_nodes() < 2 {
        return Err(GraphError::InvalidParams(
            "largest component has fewer than 2 nodes".into(),
        ));
    }
    let features = Array2::from_shape_simple_fn((skeleton.num_nodes(), feature_dim), || {
        rng.random_range(-1.0f32..=1.0)
    });
    let edges: Vec<_> = skeleton.edges().collect();
    Graph::from_edges(skeleton.num_nodes(), &edges, features)
}

fn erdos_renyi(n: usize, p: f64, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    edges
}

fn barabasi_albert(n: usize, m: usize, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    // each endpoint occurrence is one unit of attachment mass
    let mut mass = Vec::new();
    for u in 0..=m {
        for v in u + 1..=m {
            edges.push((u, v));
            mass.extend([u, v]);
        }
    }
    let mut picked = Vec::with_capacity(m);
    for v in m + 1..n {
        picked.clear();
        while picked.len() < m {
            let t = mass[rng.random_range(0..mass.len())];
            if !picked.contains(&t) {
                picked.push(t);
            }
        }
        for &t in &picked {
            edges.push((t, v));
            mass.extend([t, v]);
        }
    }
    edges
}

fn sbm(sizes: &[usize], p_in: f64, p_out: f64, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let block: Vec<usize> = sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &s)| std::iter::repeat_n(b, s))
        .collect();
    let mut edges = Vec::new();
    for u in 0..block.len() {
        for v in u + 1..block.len() {
            let p = if block[u] == block[v] { p_in } else { p_out };
            if p > 0.0 && rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    edges
}
