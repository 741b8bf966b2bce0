//! Per-worker resolution of neighborhoods: owned nodes through the worker's
//! own subgraph, everything else through the shared remote store.

use crate::csr::Csr;
use crate::graph::Graph;
use crate::partition::{PartitionPlan, WorkerSubgraph};
use crate::scalar::Real;
use crate::sparsify::SparsifiedSubgraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Locality {
    /// Resolved from the worker's own subgraph.
    Local,
    /// Resolved from the shared store.
    Remote,
    /// Owned elsewhere with no shared store to ask.
    Unavailable,
}

/// The shared store remote neighborhoods come from.
#[derive(Debug, Clone, Copy)]
pub enum RemoteSource<'a> {
    None,
    /// Full neighbor lists of the whole graph.
    Complete(&'a Csr),
    /// Each node's row from its owner's sparsified subgraph.
    Sparsified(&'a Csr),
}

/// A node's resolved neighborhood.
#[derive(Debug, Clone, Copy)]
pub struct Resolution<'a> {
    pub neighbors: &'a [u32],
    /// `None` means every weight is 1.
    pub weights: Option<&'a [f64]>,
    pub locality: Locality,
}

/// What one worker sees of the graph.
#[derive(Debug, Clone, Copy)]
pub struct GraphView<'a> {
    worker: u32,
    owner: Option<&'a [u32]>,
    local: &'a Csr,
    cached: Option<&'a [bool]>,
    remote: RemoteSource<'a>,
}

impl<'a> GraphView<'a> {
    /// `local` rows are global-id neighbor lists for the nodes `worker` owns;
    /// `cached` marks nodes whose features live on the worker.
    pub fn new(
        worker: usize,
        owner: &'a [u32],
        local: &'a Csr,
        cached: &'a [bool],
        remote: RemoteSource<'a>,
    ) -> Self {
        Self {
            worker: worker as u32,
            owner: Some(owner),
            local,
            cached: Some(cached),
            remote,
        }
    }

    /// Centralized view: every node local, every feature cached.
    pub fn full(g: &'a Graph) -> Self {
        Self {
            worker: 0,
            owner: None,
            local: g.csr(),
            cached: None,
            remote: RemoteSource::None,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.local.num_rows()
    }

    pub fn is_owned(&self, v: usize) -> bool {
        self.owner.is_none_or(|o| o[v] == self.worker)
    }

    pub fn features_cached(&self, v: usize) -> bool {
        self.cached.is_none_or(|c| c[v])
    }

    pub fn resolve(&self, v: usize) -> Resolution<'a> {
        if self.is_owned(v) {
            return Resolution {
                neighbors: self.local.row(v),
                weights: self.local.row_weights(v),
                locality: Locality::Local,
            };
        }
        match self.remote {
            RemoteSource::None => Resolution {
                neighbors: &[],
                weights: None,
                locality: Locality::Unavailable,
            },
            RemoteSource::Complete(c) | RemoteSource::Sparsified(c) => Resolution {
                neighbors: c.row(v),
                weights: c.row_weights(v),
                locality: Locality::Remote,
            },
        }
    }
}

/// Global-id neighbor rows for the worker's owned nodes; other rows empty.
pub fn local_rows(sub: &WorkerSubgraph, num_nodes: usize) -> Csr {
    let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); num_nodes];
    for l in 0..sub.num_owned() {
        let mut row: Vec<(u32, f64)> = sub.global_neighbors(l).map(|v| (v as u32, 1.0)).collect();
        row.sort_unstable_by_key(|&(v, _)| v);
        rows[sub.to_global(l)] = row;
    }
    Csr::from_rows(rows, false)
}

/// Marks the nodes whose features the worker stores (owned and halo).
pub fn cache_mask(sub: &WorkerSubgraph, num_nodes: usize) -> Vec<bool> {
    let mut mask = vec![false; num_nodes];
    for &u in sub.local_to_global() {
        mask[u as usize] = true;
    }
    mask
}

/// The shared sparsified store: node `v`'s row holds its retained edges in
/// the sparsified subgraph of `v`'s owner, with their weights.
pub fn sparsified_rows<T: Real>(parts: &[SparsifiedSubgraph<T>], plan: &PartitionPlan) -> Csr {
    let n = plan.assignment().len();
    let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    for s in parts {
        for (&(a, b), &w) in s.edges().iter().zip(s.weights()) {
            let w = w.as_f64();
            if plan.part_of(a as usize) == s.part_id() {
                rows[a as usize].push((b, w));
            }
            if plan.part_of(b as usize) == s.part_id() {
                rows[b as usize].push((a, w));
            }
        }
    }
    for row in &mut rows {
        row.sort_unstable_by_key(|&(v, _)| v);
    }
    Csr::from_rows(rows, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_synthetic, SyntheticKind};
    use crate::partition::{build_worker_subgraphs, partition_greedy};
    use crate::sparsify::sparsify_subgraph;

    #[test]
    fn owned_lists_match_full_graph_and_remote_are_subsets() {
        let g = generate_synthetic(&SyntheticKind::BarabasiAlbert { n: 120, m: 3 }, 2, 8).unwrap();
        let n = g.num_nodes();
        let plan = partition_greedy(&g, 3, 2).unwrap();
        let subs = build_worker_subgraphs(&g, &plan);
        let sparse: Vec<_> = subs
            .iter()
            .map(|s| sparsify_subgraph::<f64>(s, 0.3, s.part_id() as u64).unwrap())
            .collect();
        let store = sparsified_rows(&sparse, &plan);
        for sub in &subs {
            let rows = local_rows(sub, n);
            let mask = cache_mask(sub, n);
            let view = GraphView::new(
                sub.part_id(),
                plan.assignment(),
                &rows,
                &mask,
                RemoteSource::Sparsified(&store),
            );
            for v in 0..n {
                let r = view.resolve(v);
                if plan.part_of(v) == sub.part_id() {
                    assert_eq!(r.locality, Locality::Local);
                    assert_eq!(r.neighbors, g.neighbors(v));
                    assert!(view.features_cached(v));
                } else {
                    assert_eq!(r.locality, Locality::Remote);
                    assert!(r.neighbors.iter().all(|&x| g.has_edge(v, x as usize)));
                    assert_eq!(r.weights.unwrap().len(), r.neighbors.len());
                }
            }
        }
    }

    #[test]
    fn no_store_means_unavailable() {
        let g = generate_synthetic(&SyntheticKind::ErdosRenyi { n: 10, p: 0.5 }, 1, 1).unwrap();
        let plan = partition_greedy(&g, 2, 0).unwrap();
        let sub = &build_worker_subgraphs(&g, &plan)[0];
        let rows = local_rows(sub, g.num_nodes());
        let mask = cache_mask(sub, g.num_nodes());
        let view = GraphView::new(0, plan.assignment(), &rows, &mask, RemoteSource::None);
        let other = (0..g.num_nodes()).find(|&v| plan.part_of(v) == 1).unwrap();
        let r = view.resolve(other);
        assert_eq!(r.locality, Locality::Unavailable);
        assert!(r.neighbors.is_empty());
    }

    #[test]
    fn full_view_is_local_everywhere() {
        let g = generate_synthetic(&SyntheticKind::ErdosRenyi { n: 10, p: 0.5 }, 1, 1).unwrap();
        let view = GraphView::full(&g);
        for v in 0..g.num_nodes() {
            assert_eq!(view.resolve(v).neighbors, g.neighbors(v));
            assert!(view.features_cached(v));
        }
    }
}
