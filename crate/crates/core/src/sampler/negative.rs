use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SampleError;
use crate::graph::Graph;

/// Where per-source negative destinations may come from.
#[derive(Debug, Clone, Copy)]
pub enum NegativeScope<'a> {
    /// Any node of the graph.
    Global,
    /// Only the listed nodes (sorted ascending), e.g. a worker's own nodes.
    Within(&'a [u32]),
}

/// For each source `u`, draws one destination uniformly among candidates that
/// are neither `u` nor a neighbor of `u` in `g`, by rejection.
pub fn negative_per_source(
    sources: &[usize],
    g: &Graph,
    scope: NegativeScope<'_>,
    rng: &mut impl Rng,
) -> Result<Vec<(usize, usize)>, SampleError> {
    let n = g.num_nodes();
    let mut out = Vec::with_capacity(sources.len());
    for &u in sources {
        let v = match scope {
            NegativeScope::Global => {
                if g.degree(u) + 1 >= n {
                    return Err(SampleError::NoNonNeighbor { node: u });
                }
                loop {
                    let v = rng.random_range(0..n);
                    if v != u && !g.has_edge(u, v) {
                        break v;
                    }
                }
            }
            NegativeScope::Within(cands) => {
                let member = |x: usize| cands.binary_search(&(x as u32)).is_ok();
                let blocked = usize::from(member(u))
                    + g.neighbors(u).iter().filter(|&&x| member(x as usize)).count();
                if blocked >= cands.len() {
                    return Err(SampleError::NoNonNeighbor { node: u });
                }
                loop {
                    let v = cands[rng.random_range(0..cands.len())] as usize;
                    if v != u && !g.has_edge(u, v) {
                        break v;
                    }
                }
            }
        };
        out.push((u, v));
    }
    Ok(out)
}

/// `count` distinct unordered non-edges drawn uniformly, each as `(lo, hi)`.
pub fn negative_global_uniform(
    g: &Graph,
    count: usize,
    seed: u64,
) -> Result<Vec<(usize, usize)>, SampleError> {
    let n = g.num_nodes();
    let available = n * (n - 1) / 2 - g.num_edges();
    if count > available {
        return Err(SampleError::InsufficientNonEdges {
            requested: count,
            available,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if 2 * count > available {
        let mut all: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter(|&(u, v)| !g.has_edge(u, v))
            .collect();
        all.shuffle(&mut rng);
        all.truncate(count);
        return Ok(all);
    }
    let mut seen = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u == v || g.has_edge(u, v) {
            continue;
        }
        let pair = (u.min(v), u.max(v));
        if seen.insert(pair) {
            out.push(pair);
        }
    }
    Ok(out)
}
