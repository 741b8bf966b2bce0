//! Built-in property suite over seeded fixtures. Every oracle runs at least
//! once; a failing property carries the violating instance as text.

use std::fmt::Write as _;

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::eval::hits_at_k;
use crate::graph::{generate_synthetic, Graph, SyntheticKind};
use crate::model::{gradient_check, Architecture, ModelConfig, ModelParams, PredictorKind};
use crate::sampler::{build_computation_graph, GraphView, RemoteSource};
use crate::seed::derive_seed;
use crate::sparsify::{
    edge_probabilities, exact_effective_resistance, expected_laplacian_error_with, importance_sample,
    resistance_bounds_hold, sample_count, spectral_closeness,
};
use crate::trainer::{CommLedger, SharingMode};

/// Deliberate defects for checking that the suite catches them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Repeated draws of an edge keep a single draw's weight.
    DuplicateDrawsNotAccumulated,
}

#[derive(Debug, Clone)]
pub struct PropertyResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    /// Serialized counterexample when the property fails.
    pub instance: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub results: Vec<PropertyResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn get(&self, name: &str) -> Option<&PropertyResult> {
        self.results.iter().find(|r| r.name == name)
    }
}

fn serialize_graph(g: &Graph) -> String {
    let mut s = format!("nodes {}\n", g.num_nodes());
    for (u, v, w) in g.weighted_edges() {
        let _ = writeln!(s, "{u} {v} {w}");
    }
    s
}

fn plain(n: usize, edges: &[(usize, usize)]) -> Graph {
    Graph::from_edges(n, edges, Array2::zeros((n, 1))).expect("valid fixture")
}

fn complete(n: usize) -> Graph {
    let edges: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    plain(n, &edges)
}

fn result(name: &'static str, passed: bool, detail: String, instance: impl FnOnce() -> String) -> PropertyResult {
    PropertyResult {
        name,
        passed,
        detail,
        instance: (!passed).then(instance),
    }
}

fn resistance_bounds(seed: u64) -> PropertyResult {
    let kinds = [
        SyntheticKind::ErdosRenyi { n: 40, p: 0.2 },
        SyntheticKind::BarabasiAlbert { n: 60, m: 2 },
        SyntheticKind::Sbm {
            block_sizes: vec![15, 15, 15],
            p_in: 0.4,
            p_out: 0.05,
        },
        SyntheticKind::ErdosRenyi { n: 12, p: 0.5 },
    ];
    let mut edges = 0;
    for (i, kind) in kinds.iter().cycle().take(12).enumerate() {
        let g = match generate_synthetic(kind, 1, derive_seed(seed, &[0xb0, i as u64])) {
            Ok(g) => g,
            Err(e) => return result("resistance_bounds", false, e.to_string(), String::new),
        };
        match resistance_bounds_hold(&g) {
            Ok(c) if c.holds() => edges += c.edges_checked,
            Ok(c) => {
                let (u, v, r, lo, hi) = c.violations[0];
                return result(
                    "resistance_bounds",
                    false,
                    format!("edge ({u},{v}): r={r} outside [{lo}, {hi}]"),
                    || serialize_graph(&g),
                );
            }
            Err(e) => return result("resistance_bounds", false, e.to_string(), || serialize_graph(&g)),
        }
    }
    result("resistance_bounds", true, format!("12 graphs, {edges} edges"), String::new)
}

fn k3_tight() -> PropertyResult {
    let g = complete(3);
    match resistance_bounds_hold(&g) {
        Ok(c) => result(
            "k3_tight_upper_bound",
            c.holds() && c.tight_upper == 3,
            format!("gamma={} tight edges={}/3", c.gamma, c.tight_upper),
            || serialize_graph(&g),
        ),
        Err(e) => result("k3_tight_upper_bound", false, e.to_string(), || serialize_graph(&g)),
    }
}

fn bridges() -> PropertyResult {
    let g = plain(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]);
    let mut worst = 0.0f64;
    for i in 0..4 {
        match exact_effective_resistance(&g, i, i + 1) {
            Ok(r) => worst = worst.max((r - 1.0).abs()),
            Err(e) => return result("bridge_resistance", false, e.to_string(), || serialize_graph(&g)),
        }
    }
    result(
        "bridge_resistance",
        worst < 1e-9,
        format!("max |r - 1| on P5 = {worst:.2e}"),
        || serialize_graph(&g),
    )
}

fn closeness(seed: u64) -> PropertyResult {
    let mut worst_frac: f64 = 1.0;
    for i in 0..3u64 {
        let g = match generate_synthetic(&SyntheticKind::ErdosRenyi { n: 50, p: 0.2 }, 1, derive_seed(seed, &[0xc1, i])) {
            Ok(g) => g,
            Err(e) => return result("spectral_closeness", false, e.to_string(), String::new),
        };
        let n = g.num_nodes() as f64;
        let samples = (16.0 * n * n.ln()).round() as usize;
        match spectral_closeness(&g, samples, 100, 0.3, derive_seed(seed, &[0xc2, i])) {
            Ok(c) => {
                worst_frac = worst_frac.min(c.fraction_within());
                if c.fraction_within() < 0.95 {
                    return result(
                        "spectral_closeness",
                        false,
                        format!("{} of 100 vectors within 0.3", c.within),
                        || serialize_graph(&g),
                    );
                }
            }
            Err(e) => return result("spectral_closeness", false, e.to_string(), || serialize_graph(&g)),
        }
    }
    result(
        "spectral_closeness",
        true,
        format!("3 graphs, worst fraction within 0.3 = {worst_frac:.2}"),
        String::new,
    )
}

fn unbiasedness(seed: u64, fault: Option<Fault>) -> PropertyResult {
    let g = complete(10);
    let probs: Vec<f64> = edge_probabilities(&g, |u| g.degree(u)).expect("K10 has edges");
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let draws = sample_count(0.5, edges.len());
    let err = expected_laplacian_error_with(&g, 2000, |trial| {
        let s = importance_sample(&probs, draws, derive_seed(seed, &[0xe1, trial as u64]))?;
        Ok(s.index
            .iter()
            .zip(s.weights.iter().zip(&s.draws))
            .map(|(&e, (&w, &d))| {
                let w = match fault {
                    Some(Fault::DuplicateDrawsNotAccumulated) => w / d as f64,
                    None => w,
                };
                (edges[e].0, edges[e].1, w)
            })
            .collect())
    });
    match err {
        Ok(e) => result(
            "laplacian_unbiasedness",
            e < 0.05,
            format!("K10 alpha=0.5, 2000 trials: relative Frobenius error {e:.4}"),
            || format!("alpha 0.5\ntrials 2000\nerror {e}\n{}", serialize_graph(&g)),
        ),
        Err(e) => result("laplacian_unbiasedness", false, e.to_string(), || serialize_graph(&g)),
    }
}

fn gradients(seed: u64) -> PropertyResult {
    let g = match generate_synthetic(&SyntheticKind::ErdosRenyi { n: 20, p: 0.25 }, 8, derive_seed(seed, &[0x9d])) {
        Ok(g) => g,
        Err(e) => return result("gradient_check", false, e.to_string(), String::new),
    };
    let pairs = [(0usize, 3usize), (1, 7), (4, 9), (2, 11), (5, 6), (8, 10)];
    let labels = [1.0, 0.0, 1.0, 0.0, 1.0, 0.0];
    let seeds: Vec<usize> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    let mut notes = Vec::new();
    for arch in [Architecture::Gcn, Architecture::Sage] {
        for pred in [PredictorKind::Mlp, PredictorKind::Dot] {
            let cfg = ModelConfig {
                architecture: arch,
                predictor: pred,
                input_dim: 8,
                hidden_dim: 10,
                num_layers: 3,
            };
            let p = ModelParams::<f64>::init(&cfg, derive_seed(seed, &[0x9e]));
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0x9f]));
            let checked = build_computation_graph(&seeds, &GraphView::full(&g), &[3, 2, 2], &mut rng)
                .map_err(|e| e.to_string())
                .and_then(|cg| {
                    gradient_check(&cg, g.features(), &p, &pairs, &labels, 1e-4, 1).map_err(|e| e.to_string())
                });
            match checked {
                Ok(c) if c.checked >= 200 && c.worst_relative_error < 1e-4 => {
                    notes.push(format!("{arch}/{pred} {} params err {:.1e}", c.checked, c.worst_relative_error))
                }
                Ok(c) => {
                    return result(
                        "gradient_check",
                        false,
                        format!(
                            "{arch}/{pred}: {} params, worst relative error {:.3e} at index {:?}",
                            c.checked, c.worst_relative_error, c.worst_index
                        ),
                        || serialize_graph(&g),
                    )
                }
                Err(e) => return result("gradient_check", false, e, || serialize_graph(&g)),
            }
        }
    }
    result("gradient_check", true, notes.join("; "), String::new)
}

fn hits_definition() -> PropertyResult {
    let a = hits_at_k(&[0.9f64, 0.4], &[0.8, 0.5, 0.3, 0.2], 2);
    let ties = hits_at_k(&[0.5f64, 0.5], &[0.8, 0.5, 0.3], 2);
    let short = hits_at_k(&[0.5f64], &[0.1], 2);
    let ok = matches!(a, Ok(h) if h == 0.5) && matches!(ties, Ok(h) if h == 0.0) && short.is_err();
    result(
        "hits_at_k_definition",
        ok,
        format!("example={a:?} ties={ties:?} short_negatives_rejected={}", short.is_err()),
        || "pos [0.9, 0.4]\nneg [0.8, 0.5, 0.3, 0.2]\nk 2\n".into(),
    )
}

fn ledger_laws() -> PropertyResult {
    // node 2 is reached at two different hops from worker 0's seed
    let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)], Array2::zeros((4, 128))).expect("path");
    let owner = [0u32, 1, 1, 1];
    let cached = [true, true, false, false];
    let mut bills = Vec::new();
    for sharing in [SharingMode::Complete, SharingMode::None] {
        let remote = match sharing {
            SharingMode::None => RemoteSource::None,
            _ => RemoteSource::Complete(g.csr()),
        };
        let view = GraphView::new(0, &owner, g.csr(), &cached, remote);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let cg = match build_computation_graph(&[0], &view, &[5, 5, 5], &mut rng) {
            Ok(cg) => cg,
            Err(e) => return result("ledger_laws", false, e.to_string(), || serialize_graph(&g)),
        };
        let mut ledger = CommLedger::new(128);
        let b = ledger.account_transfer(&cg, 0, 0, 0, sharing);
        bills.push((cg.remote_nodes().len(), b.feature, b.total()));
    }
    let per_node = 4 * 128;
    let (distinct, feature, _) = bills[0];
    let ok = distinct == 2 && feature == 2 * per_node && bills[1].2 == 0;
    result(
        "ledger_laws",
        ok,
        format!(
            "complete: {distinct} distinct remote nodes billed {feature} bytes; none: {} bytes",
            bills[1].2
        ),
        || serialize_graph(&g),
    )
}

/// Runs the whole suite under `seed`, optionally with a fault injected.
pub fn cmd_verify(seed: u64, fault: Option<Fault>) -> VerifyReport {
    VerifyReport {
        results: vec![
            resistance_bounds(seed),
            k3_tight(),
            bridges(),
            closeness(seed),
            unbiasedness(seed, fault),
            gradients(seed),
            hits_definition(),
            ledger_laws(),
        ],
    }
}
