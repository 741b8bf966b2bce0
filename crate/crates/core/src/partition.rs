//! Node-to-worker assignment and per-worker subgraph materialization.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{Graph, GraphError};
use crate::seed::derive_seed;

/// Balance slack ν: no part may exceed `(1 + ν) · n / p` nodes.
pub const BALANCE_SLACK: f64 = 0.05;

#[derive(Debug, Error)]
pub enum PartitionError {
    #[error("number of parts must be at least 1")]
    ZeroParts,
    #[error("{parts} parts requested for {nodes} nodes")]
    TooManyParts { parts: usize, nodes: usize },
    #[error("{clusters} mini-clusters cannot cover {parts} parts")]
    TooFewClusters { clusters: usize, parts: usize },
    #[error("unknown partition strategy {0:?}")]
    UnknownStrategy(String),
    #[error("plan csv line {line}: {msg}")]
    Csv { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    GreedyCut,
    RandomTma,
    SuperTma,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::GreedyCut => "greedy_cut",
            Strategy::RandomTma => "random_tma",
            Strategy::SuperTma => "super_tma",
        })
    }
}

impl FromStr for Strategy {
    type Err = PartitionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "greedy_cut" | "greedy" => Ok(Strategy::GreedyCut),
            "random_tma" => Ok(Strategy::RandomTma),
            "super_tma" => Ok(Strategy::SuperTma),
            other => Err(PartitionError::UnknownStrategy(other.to_string())),
        }
    }
}

/// Assignment of every node to one of `num_parts` workers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionPlan {
    num_parts: usize,
    assignment: Vec<u32>,
    strategy: Strategy,
}

impl PartitionPlan {
    pub fn new(num_parts: usize, assignment: Vec<u32>, strategy: Strategy) -> Self {
        debug_assert!(assignment.iter().all(|&p| (p as usize) < num_parts));
        Self {
            num_parts,
            assignment,
            strategy,
        }
    }

    /// Every node in part 0.
    pub fn single(num_nodes: usize) -> Self {
        Self::new(1, vec![0; num_nodes], Strategy::GreedyCut)
    }

    pub fn num_parts(&self) -> usize {
        self.num_parts
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    #[inline]
    pub fn part_of(&self, u: usize) -> usize {
        self.assignment[u] as usize
    }

    pub fn assignment(&self) -> &[u32] {
        &self.assignment
    }

    pub fn part_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.num_parts];
        for &p in &self.assignment {
            sizes[p as usize] += 1;
        }
        sizes
    }

    /// Number of undirected edges whose endpoints sit in different parts.
    pub fn edge_cut(&self, g: &Graph) -> usize {
        g.edges()
            .filter(|&(u, v)| self.assignment[u] != self.assignment[v])
            .count()
    }

    /// Writes `node_id,part_id` rows under a header line.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "node_id,part_id")?;
        for (u, p) in self.assignment.iter().enumerate() {
            writeln!(out, "{u},{p}")?;
        }
        Ok(())
    }

    /// Reads a plan written by [`PartitionPlan::write_csv`]. Rows may come in
    /// any order but must cover `0..n` exactly once.
    pub fn read_csv(input: impl BufRead, strategy: Strategy) -> Result<Self, PartitionError> {
        let mut rows = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if i == 0 || line.trim().is_empty() {
                continue;
            }
            let bad = |msg: &str| PartitionError::Csv {
                line: i + 1,
                msg: msg.to_string(),
            };
            let (a, b) = line.split_once(',').ok_or_else(|| bad("expected node_id,part_id"))?;
            let u: usize = a.trim().parse().map_err(|_| bad("bad node id"))?;
            let p: u32 = b.trim().parse().map_err(|_| bad("bad part id"))?;
            rows.push((u, p));
        }
        let n = rows.len();
        let mut assignment = vec![u32::MAX; n];
        for (i, &(u, p)) in rows.iter().enumerate() {
            if u >= n || assignment[u] != u32::MAX {
                return Err(PartitionError::Csv {
                    line: i + 2,
                    msg: format!("node {u} missing, repeated or out of range"),
                });
            }
            assignment[u] = p;
        }
        let num_parts = assignment.iter().max().map_or(0, |&p| p as usize + 1);
        Ok(Self::new(num_parts, assignment, strategy))
    }
}

/// Largest allowed part: `floor((1 + ν) n / p)`, never below `ceil(n / p)`.
pub fn part_capacity(num_nodes: usize, num_parts: usize) -> usize {
    let relaxed = ((1.0 + BALANCE_SLACK) * num_nodes as f64 / num_parts as f64 + 1e-9).floor();
    (relaxed as usize).max(num_nodes.div_ceil(num_parts))
}

fn check_parts(g: &Graph, p: usize) -> Result<(), PartitionError> {
    if p == 0 {
        return Err(PartitionError::ZeroParts);
    }
    if p > g.num_nodes() {
        return Err(PartitionError::TooManyParts {
            parts: p,
            nodes: g.num_nodes(),
        });
    }
    Ok(())
}

/// Streaming linear deterministic greedy partitioning.
///
/// Nodes arrive in a seeded random order. Each goes to the non-full part
/// maximizing `(assigned neighbors in part) · (1 − size / capacity)`; ties go
/// to the smaller part, then the smaller part id.
pub fn partition_greedy(g: &Graph, p: usize, seed: u64) -> Result<PartitionPlan, PartitionError> {
    check_parts(g, p)?;
    let n = g.num_nodes();
    let cap = part_capacity(n, p);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0x1d6])));

    let mut assignment = vec![u32::MAX; n];
    let mut sizes = vec![0usize; p];
    let mut hits = vec![0usize; p];
    for v in order {
        for &u in g.neighbors(v) {
            if let Some(&part) = assignment.get(u as usize).filter(|&&a| a != u32::MAX) {
                hits[part as usize] += 1;
            }
        }
        let mut best: Option<(f64, usize)> = None;
        for part in 0..p {
            if sizes[part] >= cap {
                continue;
            }
            let score = hits[part] as f64 * (1.0 - sizes[part] as f64 / cap as f64);
            let better = match best {
                None => true,
                Some((s, b)) => score > s || (score == s && sizes[part] < sizes[b]),
            };
            if better {
                best = Some((score, part));
            }
        }
        let (_, part) = best.expect("total capacity covers every node");
        assignment[v] = part as u32;
        sizes[part] += 1;
        hits.iter_mut().for_each(|h| *h = 0);
    }
    Ok(PartitionPlan::new(p, assignment, Strategy::GreedyCut))
}

/// Independent uniform assignment followed by the fewest moves needed to keep
/// every part within `[floor((1 − ν) n / p), capacity]`.
pub fn partition_random_tma(
    g: &Graph,
    p: usize,
    seed: u64,
) -> Result<PartitionPlan, PartitionError> {
    check_parts(g, p)?;
    let n = g.num_nodes();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0x7a4]));
    let assignment: Vec<u32> = (0..n).map(|_| rng.random_range(0..p) as u32).collect();
    let assignment = rebalance(assignment, p);
    Ok(PartitionPlan::new(p, assignment, Strategy::RandomTma))
}

fn rebalance(mut assignment: Vec<u32>, p: usize) -> Vec<u32> {
    let n = assignment.len();
    let cap = part_capacity(n, p);
    let floor = (((1.0 - BALANCE_SLACK) * n as f64 / p as f64).floor() as usize).min(n / p);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); p];
    for (u, &part) in assignment.iter().enumerate() {
        members[part as usize].push(u);
    }
    // overflow: highest ids leave first
    let mut pool = Vec::new();
    for m in members.iter_mut() {
        while m.len() > cap {
            pool.push(m.pop().expect("non-empty"));
        }
    }
    pool.sort_unstable();
    for part in 0..p {
        while members[part].len() < floor {
            let u = match pool.pop() {
                Some(u) => u,
                None => {
                    let donor = (0..p)
                        .max_by_key(|&q| (members[q].len(), std::cmp::Reverse(q)))
                        .expect("p >= 1");
                    members[donor].pop().expect("donor above floor")
                }
            };
            members[part].push(u);
        }
    }
    while let Some(u) = pool.pop() {
        let part = (0..p)
            .min_by_key(|&q| (members[q].len(), q))
            .expect("p >= 1");
        members[part].push(u);
    }
    for (part, m) in members.iter().enumerate() {
        for &u in m {
            assignment[u] = part as u32;
        }
    }
    assignment
}

/// Greedy mini-clustering into `num_miniclusters` parts, then a seeded
/// shuffle of the clusters dealt round-robin to the `p` workers.
pub fn partition_super_tma(
    g: &Graph,
    p: usize,
    num_miniclusters: usize,
    seed: u64,
) -> Result<PartitionPlan, PartitionError> {
    check_parts(g, p)?;
    if num_miniclusters < p {
        return Err(PartitionError::TooFewClusters {
            clusters: num_miniclusters,
            parts: p,
        });
    }
    let clusters = partition_greedy(g, num_miniclusters, derive_seed(seed, &[0xc1]))?;
    let mut order: Vec<usize> = (0..num_miniclusters).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0x5a])));
    let mut cluster_part = vec![0u32; num_miniclusters];
    for (i, &c) in order.iter().enumerate() {
        cluster_part[c] = (i % p) as u32;
    }
    let assignment = clusters
        .assignment()
        .iter()
        .map(|&c| cluster_part[c as usize])
        .collect();
    Ok(PartitionPlan::new(p, assignment, Strategy::SuperTma))
}

/// Dispatches on `strategy`; `p = 1` always yields the single-part plan.
pub fn partition(
    g: &Graph,
    strategy: Strategy,
    p: usize,
    num_miniclusters: usize,
    seed: u64,
) -> Result<PartitionPlan, PartitionError> {
    if p == 1 {
        return Ok(PartitionPlan::single(g.num_nodes()));
    }
    match strategy {
        Strategy::GreedyCut => partition_greedy(g, p, seed),
        Strategy::RandomTma => partition_random_tma(g, p, seed),
        Strategy::SuperTma => partition_super_tma(g, p, num_miniclusters, seed),
    }
}

/// One worker's share of the graph.
///
/// Local ids put owned nodes first (ascending global id) followed by halo
/// nodes. In full-neighbor mode the local graph holds every edge with at
/// least one owned endpoint, so owned nodes keep their complete neighbor
/// lists; otherwise it holds only edges internal to the part.
#[derive(Debug, Clone)]
pub struct WorkerSubgraph {
    part_id: usize,
    num_owned: usize,
    local: Graph,
    local_to_global: Vec<u32>,
    global_to_local: HashMap<u32, u32>,
}

impl WorkerSubgraph {
    pub fn part_id(&self) -> usize {
        self.part_id
    }

    pub fn owned(&self) -> &[u32] {
        &self.local_to_global[..self.num_owned]
    }

    pub fn halo(&self) -> &[u32] {
        &self.local_to_global[self.num_owned..]
    }

    pub fn num_owned(&self) -> usize {
        self.num_owned
    }

    /// Local graph; its feature rows cover exactly owned ∪ halo.
    pub fn local(&self) -> &Graph {
        &self.local
    }

    #[inline]
    pub fn to_global(&self, local: usize) -> usize {
        self.local_to_global[local] as usize
    }

    #[inline]
    pub fn to_local(&self, global: usize) -> Option<usize> {
        self.global_to_local.get(&(global as u32)).map(|&l| l as usize)
    }

    pub fn local_to_global(&self) -> &[u32] {
        &self.local_to_global
    }

    /// Whether the node's features are stored on this worker.
    #[inline]
    pub fn caches(&self, global: usize) -> bool {
        self.global_to_local.contains_key(&(global as u32))
    }

    /// Neighbors of local node `local` as global ids.
    pub fn global_neighbors(&self, local: usize) -> impl Iterator<Item = usize> + '_ {
        self.local
            .neighbors(local)
            .iter()
            .map(|&l| self.local_to_global[l as usize] as usize)
    }
}

fn owned_lists(plan: &PartitionPlan) -> Vec<Vec<usize>> {
    let mut owned = vec![Vec::new(); plan.num_parts()];
    for (u, &p) in plan.assignment().iter().enumerate() {
        owned[p as usize].push(u);
    }
    owned
}

fn materialize(g: &Graph, part_id: usize, owned: &[usize], halo: bool) -> WorkerSubgraph {
    let mut ids: Vec<usize> = owned.to_vec();
    let mut global_to_local: HashMap<u32, u32> = ids
        .iter()
        .enumerate()
        .map(|(l, &u)| (u as u32, l as u32))
        .collect();
    if halo {
        let mut extra: Vec<usize> = owned
            .iter()
            .flat_map(|&u| g.neighbors(u).iter().map(|&v| v as usize))
            .filter(|v| !global_to_local.contains_key(&(*v as u32)))
            .collect();
        extra.sort_unstable();
        extra.dedup();
        for v in extra {
            global_to_local.insert(v as u32, ids.len() as u32);
            ids.push(v);
        }
    }
    let mut edges = Vec::new();
    for (l, &u) in ids.iter().enumerate().take(owned.len()) {
        for &v in g.neighbors(u) {
            if let Some(&lv) = global_to_local.get(&v) {
                // owned-owned pairs are visited twice; keep one direction
                if (lv as usize) >= owned.len() || (lv as usize) > l {
                    edges.push((l, lv as usize));
                }
            }
        }
    }
    let features = g.features().select(ndarray::Axis(0), &ids);
    let local = Graph::from_edges(ids.len(), &edges, features).expect("ids are in range");
    WorkerSubgraph {
        part_id,
        num_owned: owned.len(),
        local,
        local_to_global: ids.into_iter().map(|u| u as u32).collect(),
        global_to_local,
    }
}

/// Per-worker subgraphs that keep each owned node's full neighbor list;
/// cross-partition edges appear in both incident workers.
pub fn build_worker_subgraphs(g: &Graph, plan: &PartitionPlan) -> Vec<WorkerSubgraph> {
    owned_lists(plan)
        .iter()
        .enumerate()
        .map(|(i, owned)| materialize(g, i, owned, true))
        .collect()
}

/// Per-worker subgraphs restricted to partition-internal edges (no halo).
pub fn build_internal_subgraphs(g: &Graph, plan: &PartitionPlan) -> Vec<WorkerSubgraph> {
    owned_lists(plan)
        .iter()
        .enumerate()
        .map(|(i, owned)| materialize(g, i, owned, false))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_synthetic, SyntheticKind};
    use ndarray::Array2;

    fn plain(n: usize, edges: &[(usize, usize)]) -> Graph {
        let features = Array2::from_shape_fn((n, 2), |(i, j)| (i * 2 + j) as f32);
        Graph::from_edges(n, edges, features).unwrap()
    }

    fn two_triangles() -> Graph {
        plain(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    }

    #[test]
    fn capacity_rule() {
        assert_eq!(part_capacity(4, 2), 2);
        assert_eq!(part_capacity(1000, 4), 262);
        assert_eq!(part_capacity(6, 2), 3);
        assert_eq!(part_capacity(5, 5), 1);
        assert_eq!(part_capacity(7, 2), 4);
    }

    #[test]
    fn greedy_keeps_triangles_whole() {
        let g = two_triangles();
        for seed in 0..50 {
            let plan = partition_greedy(&g, 2, seed).unwrap();
            assert_eq!(plan.edge_cut(&g), 0, "seed {seed}");
            assert_eq!(plan.part_sizes(), vec![3, 3]);
        }
    }

    #[test]
    fn greedy_splits_k4_evenly() {
        let g = generate_synthetic(&SyntheticKind::ErdosRenyi { n: 4, p: 1.0 }, 1, 0).unwrap();
        for seed in 0..10 {
            let plan = partition_greedy(&g, 2, seed).unwrap();
            assert_eq!(plan.part_sizes(), vec![2, 2]);
        }
    }

    #[test]
    fn path_split_must_cut() {
        let edges: Vec<_> = (0..9).map(|i| (i, i + 1)).collect();
        let g = plain(10, &edges);
        for seed in 0..10 {
            assert!(partition_greedy(&g, 2, seed).unwrap().edge_cut(&g) >= 1);
        }
    }

    #[test]
    fn too_many_parts() {
        let g = two_triangles();
        assert!(matches!(
            partition_greedy(&g, 7, 0),
            Err(PartitionError::TooManyParts { parts: 7, nodes: 6 })
        ));
        assert!(matches!(
            partition_random_tma(&g, 0, 0),
            Err(PartitionError::ZeroParts)
        ));
    }

    #[test]
    fn random_tma_examples() {
        let g = generate_synthetic(&SyntheticKind::ErdosRenyi { n: 1000, p: 0.01 }, 1, 2).unwrap();
        assert_eq!(g.num_nodes(), 1000, "fixture should be connected");
        let plan = partition_random_tma(&g, 4, 123).unwrap();
        for s in plan.part_sizes() {
            assert!((237..=263).contains(&s), "size {s}");
        }
        assert_eq!(plan, partition_random_tma(&g, 4, 123).unwrap());
        let single = partition_random_tma(&g, 1, 5).unwrap();
        assert!(single.assignment().iter().all(|&p| p == 0));
    }

    #[test]
    fn super_tma_examples() {
        let g = two_triangles();
        for seed in 0..20 {
            let plan = partition_super_tma(&g, 2, 2, seed).unwrap();
            assert_eq!(plan.edge_cut(&g), 0);
            // one cluster per part: same grouping as greedy, up to labels
            let greedy = partition_greedy(&g, 2, derive_seed(seed, &[0xc1])).unwrap();
            let a = plan.assignment();
            let b = greedy.assignment();
            assert!((0..6).all(|u| (0..6).all(|v| (a[u] == a[v]) == (b[u] == b[v]))));
        }
        let singletons = partition_super_tma(&g, 2, 6, 4).unwrap();
        assert_eq!(singletons.part_sizes(), vec![3, 3]);
        assert!(matches!(
            partition_super_tma(&g, 3, 2, 0),
            Err(PartitionError::TooFewClusters { .. })
        ));
        assert!(partition_super_tma(&g, 2, 7, 0).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let g = two_triangles();
        let plan = partition_greedy(&g, 2, 1).unwrap();
        let mut buf = Vec::new();
        plan.write_csv(&mut buf).unwrap();
        let back = PartitionPlan::read_csv(&buf[..], Strategy::GreedyCut).unwrap();
        assert_eq!(back, plan);
        assert!(PartitionPlan::read_csv(&b"node_id,part_id\n0,0\n0,1\n"[..], Strategy::GreedyCut)
            .is_err());
    }

    #[test]
    fn cross_edge_in_both_workers() {
        let g = plain(2, &[(0, 1)]);
        let plan = PartitionPlan::new(2, vec![0, 1], Strategy::GreedyCut);
        let subs = build_worker_subgraphs(&g, &plan);
        assert_eq!(subs[0].halo(), &[1]);
        assert_eq!(subs[1].halo(), &[0]);
        assert_eq!(subs[0].local().num_edges(), 1);
        assert_eq!(subs[1].local().num_edges(), 1);
    }

    #[test]
    fn single_part_is_whole_graph() {
        let g = two_triangles();
        let subs = build_worker_subgraphs(&g, &PartitionPlan::single(6));
        assert_eq!(subs.len(), 1);
        assert!(subs[0].halo().is_empty());
        assert_eq!(subs[0].local(), &g);
    }

    #[test]
    fn star_halo() {
        let g = plain(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        let plan = PartitionPlan::new(2, vec![0, 1, 1, 1, 1], Strategy::GreedyCut);
        let subs = build_worker_subgraphs(&g, &plan);
        assert_eq!(subs[0].halo(), &[1, 2, 3, 4]);
        assert_eq!(subs[1].halo(), &[0]);
        for l in 0..subs[1].num_owned() {
            assert_eq!(subs[1].global_neighbors(l).collect::<Vec<_>>(), vec![0]);
        }
        assert_eq!(subs[1].local().features().row(4).to_vec(), vec![0.0, 1.0]);
    }

    #[test]
    fn internal_subgraphs_drop_cross_edges() {
        let g = plain(4, &[(0, 1), (1, 2), (2, 3)]);
        let plan = PartitionPlan::new(2, vec![0, 0, 1, 1], Strategy::GreedyCut);
        let subs = build_internal_subgraphs(&g, &plan);
        assert!(subs.iter().all(|s| s.halo().is_empty()));
        assert_eq!(subs[0].local().num_edges(), 1);
        assert_eq!(subs[1].local().num_edges(), 1);
    }
}
