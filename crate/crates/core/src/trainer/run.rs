use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{SharingMode, SyncMode, TrainConfig, Variant};
use super::ledger::{Bytes, CommLedger, EDGE_BYTES, WEIGHT_BYTES};
use super::sync::{sync_gradients, sync_models};
use super::TrainError;
use crate::csr::Csr;
use crate::eval::{default_k, evaluate_model, EvalReport, EvalSet};
use crate::graph::{EdgeSplit, Graph, FEATURE_BYTES};
use crate::model::{loss_and_gradients, ModelParams, OptimizerState};
use crate::partition::{build_internal_subgraphs, build_worker_subgraphs, partition, PartitionPlan};
use crate::sampler::{
    build_computation_graph_excluding, cache_mask, local_rows, negative_per_source, owned_train_edges,
    sparsified_rows, ComputationGraph, EpochPositives, GraphView, NegativeScope, PositiveSampler,
    RemoteSource, SampleError,
};
use crate::scalar::Real;
use crate::seed::derive_seed;
use crate::sparsify::sparsify_subgraph_with;

/// One row of the metric history.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub variant: String,
    /// Mean batch loss over all worker batches of the epoch.
    pub train_loss: f64,
    /// Validation Hits@K, when the epoch was evaluated.
    pub val_hits: Option<f64>,
    pub k: usize,
    /// Cumulative per-epoch bytes up to this epoch (setup excluded).
    pub feature_bytes: u64,
    pub structure_bytes: u64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<T> {
    /// Parameters with the best validation Hits@K.
    pub params: ModelParams<T>,
    pub final_params: ModelParams<T>,
    pub ledger: CommLedger,
    pub history: Vec<EpochMetrics>,
    pub best_epoch: usize,
    /// Test report of [`TrainOutcome::params`].
    pub test: EvalReport,
    pub num_workers: usize,
    pub plan: PartitionPlan,
}

impl<T> TrainOutcome<T> {
    /// Per-epoch bytes of epoch `e`, all workers.
    pub fn epoch_bytes(&self, e: usize) -> Bytes {
        self.ledger.epoch_total(e)
    }
}

/// `epoch,variant,train_loss,val_hits,k,feature_bytes,structure_bytes`.
pub fn write_metrics_csv(history: &[EpochMetrics], mut out: impl Write, header: bool) -> std::io::Result<()> {
    if header {
        writeln!(out, "epoch,variant,train_loss,val_hits,k,feature_bytes,structure_bytes")?;
    }
    for m in history {
        let val = m.val_hits.map_or(String::new(), |h| h.to_string());
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            m.epoch, m.variant, m.train_loss, val, m.k, m.feature_bytes, m.structure_bytes
        )?;
    }
    Ok(())
}

/// Everything one worker samples from.
struct Worker<'a> {
    view: GraphView<'a>,
    sampler: Option<PositiveSampler>,
    scope: NegativeScope<'a>,
}

struct Step<T> {
    loss: T,
    grads: ModelParams<T>,
    cg: ComputationGraph,
}

struct Storage {
    rows: Vec<Csr>,
    masks: Vec<Vec<bool>>,
    /// Nodes of each worker subgraph (owned plus halo), ascending.
    local_nodes: Vec<Vec<u32>>,
    store: Option<Csr>,
}

fn check_split(g: &Graph, split: &EdgeSplit) -> Result<(), TrainError> {
    let n = g.num_nodes();
    let all = split
        .train_pos
        .iter()
        .chain(&split.val_pos)
        .chain(&split.test_pos)
        .chain(&split.val_neg)
        .chain(&split.test_neg);
    for &(u, v) in all {
        if u >= n || v >= n {
            return Err(TrainError::Graph(crate::graph::GraphError::NodeOutOfRange {
                node: u.max(v),
                num_nodes: n,
            }));
        }
    }
    if split.train_pos.is_empty() {
        return Err(TrainError::NoTrainEdges);
    }
    Ok(())
}

/// Trains `config.num_parts` simulated workers on the training edges of
/// `split`. Message passing, partitioning and sparsification all use the
/// training graph; negatives are rejected against the whole of `g`.
pub fn run_training<T: Real>(
    g: &Graph,
    split: &EdgeSplit,
    config: &TrainConfig,
    variant: &str,
) -> Result<TrainOutcome<T>, TrainError> {
    config.validate()?;
    check_split(g, split)?;
    let train = g.edge_subgraph(&split.train_pos)?;
    let n = g.num_nodes();
    let p = config.num_parts;
    let seeds = config.seeds;
    let plan = partition(&train, config.strategy, p, config.num_miniclusters, seeds.partition)?;
    let halo_subs = build_worker_subgraphs(&train, &plan);
    let subs = if config.full_neighbor_halo {
        halo_subs.clone()
    } else {
        build_internal_subgraphs(&train, &plan)
    };

    let feature_bytes = FEATURE_BYTES * g.feature_dim() as u64;
    let mut ledger = CommLedger::new(g.feature_dim());
    for sub in &subs {
        ledger.add_setup(
            sub.part_id(),
            Bytes {
                feature: sub.halo().len() as u64 * feature_bytes,
                structure: 0,
            },
        );
    }
    let store = match config.sharing_mode {
        SharingMode::Sparsified => {
            let parts = halo_subs
                .iter()
                .map(|s| {
                    let seed = derive_seed(seeds.sparsify, &[s.part_id() as u64]);
                    sparsify_subgraph_with::<T>(s, config.alpha, config.degree_source, Some(&train), seed)
                })
                .collect::<Result<Vec<_>, _>>()?;
            for s in &parts {
                ledger.add_setup(
                    s.part_id(),
                    Bytes {
                        feature: 0,
                        structure: s.retained() as u64 * (EDGE_BYTES + WEIGHT_BYTES),
                    },
                );
            }
            Some(sparsified_rows(&parts, &plan))
        }
        SharingMode::Complete => {
            for s in &halo_subs {
                ledger.add_setup(
                    s.part_id(),
                    Bytes {
                        feature: 0,
                        structure: s.local().num_edges() as u64 * EDGE_BYTES,
                    },
                );
            }
            None
        }
        SharingMode::None => None,
    };

    let storage = Storage {
        rows: subs.iter().map(|s| local_rows(s, n)).collect(),
        masks: subs.iter().map(|s| cache_mask(s, n)).collect(),
        local_nodes: subs
            .iter()
            .map(|s| {
                let mut v = s.local_to_global().to_vec();
                v.sort_unstable();
                v
            })
            .collect(),
        store,
    };
    let mut workers = Vec::with_capacity(p);
    for (w, sub) in subs.iter().enumerate() {
        let remote = match (config.sharing_mode, &storage.store) {
            (SharingMode::Sparsified, Some(s)) => RemoteSource::Sparsified(s),
            (SharingMode::Complete, _) => RemoteSource::Complete(train.csr()),
            _ => RemoteSource::None,
        };
        let edges = owned_train_edges(&split.train_pos, &plan, w, !config.full_neighbor_halo);
        workers.push(Worker {
            view: GraphView::new(w, plan.assignment(), &storage.rows[w], &storage.masks[w], remote),
            sampler: PositiveSampler::new(sub.part_id(), edges).ok(),
            scope: if config.local_only_negatives {
                NegativeScope::Within(&storage.local_nodes[w])
            } else {
                NegativeScope::Global
            },
        });
    }
    train_loop(g, &train, split, config, variant, &workers, ledger, plan.clone())
}

/// Single-worker training on the centralized view of the training graph,
/// with global negatives and no shared store.
pub fn run_centralized<T: Real>(
    g: &Graph,
    split: &EdgeSplit,
    config: &TrainConfig,
    variant: &str,
) -> Result<TrainOutcome<T>, TrainError> {
    config.validate()?;
    check_split(g, split)?;
    let train = g.edge_subgraph(&split.train_pos)?;
    let plan = PartitionPlan::single(g.num_nodes());
    let mut cfg = config.clone();
    cfg.num_parts = 1;
    cfg.sharing_mode = SharingMode::None;
    let workers = [Worker {
        view: GraphView::full(&train),
        sampler: PositiveSampler::new(0, split.train_pos.clone()).ok(),
        scope: NegativeScope::Global,
    }];
    let ledger = CommLedger::new(g.feature_dim());
    train_loop(g, &train, split, &cfg, variant, &workers, ledger, plan)
}

/// Runs a named variant: its flag bundle is applied on top of `config`.
pub fn run_baseline<T: Real>(
    g: &Graph,
    split: &EdgeSplit,
    variant: Variant,
    config: &TrainConfig,
) -> Result<TrainOutcome<T>, TrainError> {
    let mut cfg = config.clone();
    variant.apply(&mut cfg);
    match variant {
        Variant::Centralized => run_centralized(g, split, &cfg, variant.name()),
        _ => run_training(g, split, &cfg, variant.name()),
    }
}

fn worker_step<T: Real>(
    g: &Graph,
    config: &TrainConfig,
    worker: &Worker<'_>,
    positives: Option<&EpochPositives<'_>>,
    params: &ModelParams<T>,
    (epoch, w, batch): (usize, usize, usize),
) -> Result<Option<Step<T>>, TrainError> {
    let Some(positives) = positives else {
        return Ok(None);
    };
    let pos = positives.batch(batch, config.batch_size);
    if pos.is_empty() {
        return Ok(None);
    }
    let sample_err = |source: SampleError| TrainError::Sample {
        epoch,
        worker: w,
        batch,
        source,
    };
    let tags = [0x6261, epoch as u64, w as u64, batch as u64];
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seeds.sample, &tags));
    let sources: Vec<usize> = pos.iter().map(|&(u, _)| u).collect();
    let neg = negative_per_source(&sources, g, worker.scope, &mut rng).map_err(sample_err)?;
    let mut pairs = pos;
    let num_pos = pairs.len();
    pairs.extend(neg);
    let labels: Vec<T> = (0..pairs.len())
        .map(|i| if i < num_pos { T::one() } else { T::zero() })
        .collect();
    let endpoints: Vec<usize> = pairs.iter().flat_map(|&(u, v)| [u, v]).collect();
    let exclude = if config.exclude_target_edges { &pairs[..num_pos] } else { &[] };
    let mut cg = build_computation_graph_excluding(&endpoints, &worker.view, &config.fanouts, exclude, &mut rng)
        .map_err(sample_err)?;
    if !config.use_edge_weights {
        cg.clear_weights();
    }
    let (loss, grads) = loss_and_gradients(&cg, g.features(), params, &pairs, &labels).map_err(
        |source| TrainError::Model {
            epoch,
            worker: w,
            batch,
            source,
        },
    )?;
    Ok(Some(Step { loss, grads, cg }))
}

#[allow(clippy::too_many_arguments)]
fn train_loop<T: Real>(
    g: &Graph,
    train: &Graph,
    split: &EdgeSplit,
    config: &TrainConfig,
    variant: &str,
    workers: &[Worker<'_>],
    mut ledger: CommLedger,
    plan: PartitionPlan,
) -> Result<TrainOutcome<T>, TrainError> {
    if workers.iter().all(|w| w.sampler.is_none()) {
        return Err(TrainError::NoTrainEdges);
    }
    let p = workers.len();
    let seeds = config.seeds;
    let k = config
        .eval_k
        .unwrap_or_else(|| default_k(split.val_neg.len().min(split.test_neg.len())));
    let init = ModelParams::<T>::init(&config.model_config(g.feature_dim()), seeds.init);
    let mut replicas = vec![init.clone(); p];
    let mut optimizers: Vec<_> = replicas
        .iter()
        .map(|r| OptimizerState::new(r, config.adam))
        .collect();
    let mut history = Vec::with_capacity(config.epochs);
    let mut best: Option<(f64, usize, ModelParams<T>)> = None;

    for epoch in 0..config.epochs {
        let perms: Vec<Option<EpochPositives<'_>>> = workers
            .iter()
            .map(|w| w.sampler.as_ref().map(|s| s.epoch(seeds.sample, epoch)))
            .collect();
        let num_batches = perms
            .iter()
            .flatten()
            .map(|e| e.num_batches(config.batch_size))
            .max()
            .unwrap_or(0);
        let mut loss_sum = 0.0;
        let mut loss_count = 0usize;
        for batch in 0..num_batches {
            let steps = (0..p)
                .into_par_iter()
                .map(|w| {
                    worker_step(g, config, &workers[w], perms[w].as_ref(), &replicas[w], (epoch, w, batch))
                })
                .collect::<Result<Vec<_>, _>>()?;
            for (w, step) in steps.iter().enumerate() {
                if let Some(s) = step {
                    ledger.account_transfer(&s.cg, epoch, w, batch, config.sharing_mode);
                    loss_sum += s.loss.as_f64();
                    loss_count += 1;
                }
            }
            match config.sync_mode {
                SyncMode::GradientAvg => {
                    let grads: Vec<ModelParams<T>> = steps
                        .into_iter()
                        .map(|s| s.map_or_else(|| init.zeros_like(), |s| s.grads))
                        .collect();
                    let avg = sync_gradients(&grads).map_err(TrainError::Sync)?;
                    for (r, o) in replicas.iter_mut().zip(&mut optimizers) {
                        o.step(r, &avg).map_err(TrainError::Sync)?;
                    }
                }
                SyncMode::ModelAvg => {
                    for ((r, o), s) in replicas.iter_mut().zip(&mut optimizers).zip(&steps) {
                        if let Some(s) = s {
                            o.step(r, &s.grads).map_err(TrainError::Sync)?;
                        }
                    }
                    if (batch + 1) % config.sync_period == 0 || batch + 1 == num_batches {
                        let avg = sync_models(&replicas).map_err(TrainError::Sync)?;
                        replicas.iter_mut().for_each(|r| r.clone_from(&avg));
                    }
                }
            }
            debug_assert!(
                config.sync_mode == SyncMode::ModelAvg && (batch + 1) % config.sync_period != 0
                    || replicas.windows(2).all(|w| w[0] == w[1]),
                "replicas diverged after synchronization"
            );
        }

        let evaluate = (epoch + 1) % config.eval_every == 0 || epoch + 1 == config.epochs;
        let val_hits = if evaluate {
            let r = evaluate_model(&replicas[0], split, EvalSet::Validation, train, &config.fanouts, &[k], seeds.eval)?;
            let h = r.primary();
            if best.as_ref().is_none_or(|(b, _, _)| h > *b) {
                best = Some((h, epoch, replicas[0].clone()));
            }
            Some(h)
        } else {
            None
        };
        let cum = ledger.cumulative(epoch);
        history.push(EpochMetrics {
            epoch,
            variant: variant.to_string(),
            train_loss: if loss_count > 0 { loss_sum / loss_count as f64 } else { 0.0 },
            val_hits,
            k,
            feature_bytes: cum.feature,
            structure_bytes: cum.structure,
        });
    }

    let (_, best_epoch, best_params) = best.expect("the last epoch is always evaluated");
    let mut test = evaluate_model(&best_params, split, EvalSet::Test, train, &config.fanouts, &[k], seeds.eval)?;
    test.epoch = best_epoch;
    test.variant = variant.to_string();
    Ok(TrainOutcome {
        params: best_params,
        final_params: replicas.swap_remove(0),
        ledger,
        history,
        best_epoch,
        test,
        num_workers: p,
        plan,
    })
}
