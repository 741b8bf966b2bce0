//! `partition` and `sparsify` dumps, reproducing exactly what training
//! builds for the first configured variant.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::config::ExperimentConfig;
use super::run::load_data;
use super::{io_err, ExperimentError};
use crate::graph::Graph;
use crate::partition::{build_worker_subgraphs, partition, PartitionPlan};
use crate::seed::derive_seed;
use crate::sparsify::{sparsify_subgraph_with, SparsifiedSubgraph};
use crate::trainer::TrainConfig;

fn effective_train(cfg: &ExperimentConfig) -> TrainConfig {
    let mut t = cfg.train.clone();
    cfg.variants[0].apply(&mut t);
    t
}

fn plan_for(cfg: &ExperimentConfig) -> Result<(Graph, PartitionPlan), ExperimentError> {
    let (g, split) = load_data(cfg)?;
    let train = g.edge_subgraph(&split.train_pos)?;
    let t = effective_train(cfg);
    let plan = partition(&train, t.strategy, t.num_parts, t.num_miniclusters, t.seeds.partition)?;
    Ok((train, plan))
}

fn create(path: &Path) -> Result<BufWriter<File>, ExperimentError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

/// Writes the training-graph partition to `out` as `node_id,part_id` and
/// returns the plan with the graph it partitions.
pub fn dump_partition(cfg: &ExperimentConfig, out: &Path) -> Result<(Graph, PartitionPlan), ExperimentError> {
    let (train, plan) = plan_for(cfg)?;
    let mut w = create(out)?;
    writeln!(w, "# config_hash={} seed={}", cfg.hash(), cfg.seed).map_err(io_err(out))?;
    plan.write_csv(&mut w).map_err(io_err(out))?;
    w.flush().map_err(io_err(out))?;
    Ok((train, plan))
}

#[derive(Debug, Clone)]
pub struct SparsifyDump {
    pub parts: Vec<SparsifiedSubgraph<f64>>,
    pub files: Vec<PathBuf>,
}

impl SparsifyDump {
    /// Distinct retained edges over source edges, all parts together.
    pub fn overall_retention(&self) -> f64 {
        let kept: usize = self.parts.iter().map(|p| p.retained()).sum();
        let total: usize = self.parts.iter().map(|p| p.source_edge_count()).sum();
        kept as f64 / total.max(1) as f64
    }
}

/// Sparsifies every partition subgraph and writes `part_<i>.csv`
/// (`u,v,weight`) into `dir`.
pub fn dump_sparsified(cfg: &ExperimentConfig, dir: &Path) -> Result<SparsifyDump, ExperimentError> {
    let (train, plan) = plan_for(cfg)?;
    let t = effective_train(cfg);
    let mut dump = SparsifyDump {
        parts: Vec::new(),
        files: Vec::new(),
    };
    for sub in build_worker_subgraphs(&train, &plan) {
        let seed = derive_seed(t.seeds.sparsify, &[sub.part_id() as u64]);
        let sp = sparsify_subgraph_with::<f64>(&sub, t.alpha, t.degree_source, Some(&train), seed)?;
        let path = dir.join(format!("part_{}.csv", sub.part_id()));
        let mut w = create(&path)?;
        writeln!(w, "# config_hash={} seed={}", cfg.hash(), cfg.seed).map_err(io_err(&path))?;
        writeln!(w, "# {}", sp.summary()).map_err(io_err(&path))?;
        sp.write_csv(&mut w).map_err(io_err(&path))?;
        w.flush().map_err(io_err(&path))?;
        dump.files.push(path);
        dump.parts.push(sp);
    }
    Ok(dump)
}
