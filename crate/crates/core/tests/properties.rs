use std::collections::HashSet;

use ndarray::Array2;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lpsim::eval::hits_at_k;
use lpsim::graph::{generate_synthetic, load_graph, split_edges, write_graph, SplitRatios, SyntheticKind};
use lpsim::model::{bce_loss, forward_embeddings, Architecture, ModelConfig, ModelParams, PredictorKind};
use lpsim::partition::{build_worker_subgraphs, partition, Strategy as Partitioner};
use lpsim::sampler::{build_computation_graph, GraphView};
use lpsim::sparsify::{sparsify_subgraph, sparsify_subgraph_with, DegreeSource};
use lpsim::trainer::{run_baseline, Seeds, TrainConfig, Variant};
use lpsim::Graph;

fn edge_list() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (2usize..30).prop_flat_map(|n| (Just(n), prop::collection::vec((0..n, 0..n), 0..80)))
}

fn graph_kind() -> impl Strategy<Value = SyntheticKind> {
    prop_oneof![
        (30usize..120, 0.05f64..0.2).prop_map(|(n, p)| SyntheticKind::ErdosRenyi { n, p }),
        (30usize..120, 1usize..4).prop_map(|(n, m)| SyntheticKind::BarabasiAlbert { n, m }),
        (10usize..30).prop_map(|b| SyntheticKind::Sbm {
            block_sizes: vec![b; 3],
            p_in: 0.4,
            p_out: 0.02
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn csr_is_symmetric_loop_free_and_monotone((n, edges) in edge_list()) {
        let g = Graph::from_edges(n, &edges, Array2::zeros((n, 2))).unwrap();
        let csr = g.csr();
        prop_assert!(csr.offsets().windows(2).all(|w| w[0] <= w[1]));
        for u in 0..n {
            for &v in g.neighbors(u) {
                prop_assert_ne!(u, v as usize);
                prop_assert!(g.has_edge(v as usize, u));
            }
        }
        let distinct: HashSet<(usize, usize)> =
            edges.iter().filter(|(a, b)| a != b).map(|&(a, b)| (a.min(b), a.max(b))).collect();
        prop_assert_eq!(g.num_edges(), distinct.len());
    }

    #[test]
    fn write_then_load_reproduces_graph(kind in graph_kind(), seed in 0u64..1000) {
        let g = generate_synthetic(&kind, 3, seed).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (e, f) = (dir.path().join("e.txt"), dir.path().join("f.csv"));
        write_graph(&g, &e, &f).unwrap();
        let back = load_graph(&e, &f).unwrap();
        prop_assert_eq!(back.edges().collect::<Vec<_>>(), g.edges().collect::<Vec<_>>());
        prop_assert_eq!(back.features(), g.features());
    }

    #[test]
    fn unit_difference_quadratic_form((n, edges) in edge_list(), a in 0usize..30, b in 0usize..30) {
        let g = Graph::from_edges(n, &edges, Array2::zeros((n, 1))).unwrap();
        let (u, v) = (a % n, b % n);
        prop_assume!(u != v);
        let mut x = vec![0.0f64; n];
        x[u] = 1.0;
        x[v] = -1.0;
        let q: f64 = g.laplacian_quadratic_form(&x).unwrap();
        // L_uu + L_vv - 2 L_uv, with L_uv = -1 on an edge
        let expect = g.degree(u) as f64 + g.degree(v) as f64 + if g.has_edge(u, v) { 2.0 } else { 0.0 };
        prop_assert_eq!(q, expect);
    }

    #[test]
    fn split_is_reproducible_and_sized_by_ratio(seed in 0u64..1000, other in 0u64..1000) {
        let g = generate_synthetic(&SyntheticKind::BarabasiAlbert { n: 80, m: 2 }, 1, 1).unwrap();
        let a = split_edges(&g, SplitRatios::default(), 3, seed).unwrap();
        prop_assert_eq!(&a, &split_edges(&g, SplitRatios::default(), 3, seed).unwrap());
        let b = split_edges(&g, SplitRatios::default(), 3, other).unwrap();
        prop_assert_eq!(
            (a.train_pos.len(), a.val_pos.len(), a.test_pos.len(), a.val_neg.len(), a.test_neg.len()),
            (b.train_pos.len(), b.val_pos.len(), b.test_pos.len(), b.val_neg.len(), b.test_neg.len())
        );
    }

    #[test]
    fn partitions_cover_disjointly_and_keep_neighbors(
        kind in graph_kind(),
        p in 1usize..6,
        strategy in prop_oneof![Just(Partitioner::GreedyCut), Just(Partitioner::RandomTma), Just(Partitioner::SuperTma)],
        seed in 0u64..100,
    ) {
        let g = generate_synthetic(&kind, 1, seed).unwrap();
        let plan = partition(&g, strategy, p, 16, seed).unwrap();
        prop_assert_eq!(&plan, &partition(&g, strategy, p, 16, seed).unwrap());
        let subs = build_worker_subgraphs(&g, &plan);
        let mut seen = vec![false; g.num_nodes()];
        for sub in &subs {
            for (l, &u) in sub.owned().iter().enumerate() {
                prop_assert!(!seen[u as usize]);
                seen[u as usize] = true;
                let mut local: Vec<usize> = sub.global_neighbors(l).collect();
                let mut global: Vec<usize> = g.neighbors(u as usize).iter().map(|&v| v as usize).collect();
                local.sort_unstable();
                global.sort_unstable();
                prop_assert_eq!(local, global);
            }
        }
        prop_assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn sparsifier_weights_count_draws(
        kind in graph_kind(),
        alpha in 0.05f64..1.0,
        seed in 0u64..1000,
        global in any::<bool>(),
    ) {
        let g = generate_synthetic(&kind, 1, seed).unwrap();
        let plan = partition(&g, Partitioner::GreedyCut, 3, 16, seed).unwrap();
        for sub in build_worker_subgraphs(&g, &plan) {
            if sub.local().num_edges() == 0 {
                continue;
            }
            let sp = if global {
                sparsify_subgraph_with::<f64>(&sub, alpha, DegreeSource::Global, Some(&g), seed).unwrap()
            } else {
                sparsify_subgraph::<f64>(&sub, alpha, seed).unwrap()
            };
            prop_assert_eq!(sp.nodes(), sub.local_to_global());
            let l = sp.samples_drawn() as f64;
            for ((&w, &p), &d) in sp.weights().iter().zip(sp.probabilities()).zip(sp.draws()) {
                prop_assert!((w * l * p - d as f64).abs() < 1e-12);
            }
            prop_assert_eq!(sp.draws().iter().map(|&d| d as usize).sum::<usize>(), sp.samples_drawn());
        }
    }

    #[test]
    fn computation_graph_layers_nest_and_replay(kind in graph_kind(), seed in 0u64..1000, f1 in 1usize..6, f2 in 1usize..6) {
        let g = generate_synthetic(&kind, 1, seed).unwrap();
        let seeds: Vec<usize> = (0..g.num_nodes()).step_by(7).collect();
        let view = GraphView::full(&g);
        let build = || build_computation_graph(&seeds, &view, &[f1, f2], &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let cg = build();
        let again = build();
        prop_assert_eq!(cg.layers(), again.layers());
        for (k, block) in cg.blocks().iter().enumerate() {
            let (dst, src) = (&cg.layers()[k], &cg.layers()[k + 1]);
            prop_assert_eq!(&src[..dst.len()], &dst[..]);
            prop_assert_eq!(block.num_dst(), dst.len());
            prop_assert_eq!(block.num_src(), src.len());
            for i in 0..block.num_dst() {
                let (nbrs, _) = block.neighbors(i);
                prop_assert!(nbrs.len() <= [f1, f2][k]);
                for &j in nbrs {
                    prop_assert!(g.has_edge(dst[i] as usize, src[j as usize] as usize));
                }
            }
        }
    }

    #[test]
    fn relabeling_permutes_embeddings(
        seed in 0u64..1000,
        perm_seed in 0u64..1000,
        sage in any::<bool>(),
    ) {
        use rand::seq::SliceRandom;
        let g = generate_synthetic(&SyntheticKind::ErdosRenyi { n: 25, p: 0.15 }, 4, seed).unwrap();
        let n = g.num_nodes();
        let mut pi: Vec<usize> = (0..n).collect();
        pi.shuffle(&mut ChaCha8Rng::seed_from_u64(perm_seed));
        let edges: Vec<(usize, usize)> = g.edges().map(|(u, v)| (pi[u], pi[v])).collect();
        let mut x = Array2::zeros((n, 4));
        for u in 0..n {
            x.row_mut(pi[u]).assign(&g.features().row(u));
        }
        let h = Graph::from_edges(n, &edges, x).unwrap();
        let cfg = ModelConfig {
            architecture: if sage { Architecture::Sage } else { Architecture::Gcn },
            predictor: PredictorKind::Dot,
            input_dim: 4,
            hidden_dim: 5,
            num_layers: 2,
        };
        let params = ModelParams::<f64>::init(&cfg, seed);
        // fanouts above the maximum degree take every neighbor
        let all = [n, n];
        let seeds: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let cg = build_computation_graph(&seeds, &GraphView::full(&g), &all, &mut rng).unwrap();
        let permuted: Vec<usize> = seeds.iter().map(|&u| pi[u]).collect();
        let cg2 = build_computation_graph(&permuted, &GraphView::full(&h), &all, &mut rng).unwrap();
        let e1 = forward_embeddings(&cg, g.features(), &params).unwrap();
        let e2 = forward_embeddings(&cg2, h.features(), &params).unwrap();
        for u in 0..n {
            let (r1, r2) = (cg.position(u).unwrap(), cg2.position(pi[u]).unwrap());
            for (a, b) in e1.row(r1).iter().zip(e2.row(r2)) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn loss_is_non_negative(scores in prop::collection::vec(-50.0f64..50.0, 1..40), bits in any::<u64>()) {
        let labels: Vec<f64> = (0..scores.len()).map(|i| ((bits >> (i % 64)) & 1) as f64).collect();
        prop_assert!(bce_loss(&scores, &labels).unwrap() >= 0.0);
        let zeros = vec![0.0f64; scores.len()];
        prop_assert_eq!(bce_loss(&zeros, &labels).unwrap(), std::f64::consts::LN_2);
    }

    #[test]
    fn hits_fall_as_k_shrinks(
        pos in prop::collection::vec(-1.0f64..1.0, 1..30),
        neg in prop::collection::vec(-1.0f64..1.0, 1..30),
        a in 1usize..30,
        b in 1usize..30,
    ) {
        let (lo, hi) = (a.min(b).min(neg.len()), a.max(b).min(neg.len()));
        let (h_lo, h_hi) = (hits_at_k(&pos, &neg, lo).unwrap(), hits_at_k(&pos, &neg, hi).unwrap());
        prop_assert!((0.0..=1.0).contains(&h_lo));
        prop_assert!(h_hi >= h_lo);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn no_sharing_bills_no_epoch_bytes(seed in 0u64..1000, p in 2usize..5) {
        let g = generate_synthetic(&SyntheticKind::BarabasiAlbert { n: 120, m: 3 }, 4, seed).unwrap();
        let split = split_edges(&g, SplitRatios::default(), 3, seed).unwrap();
        let cfg = TrainConfig {
            num_parts: p,
            fanouts: vec![4, 2],
            batch_size: 32,
            epochs: 2,
            hidden_dim: 4,
            seeds: Seeds::from_base(seed),
            ..TrainConfig::default()
        };
        let out = run_baseline::<f64>(&g, &split, Variant::SplpgMinus, &cfg).unwrap();
        prop_assert!((0..2).all(|e| out.epoch_bytes(e).total() == 0));
    }
}
