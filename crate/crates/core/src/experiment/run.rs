//! `run`: generate or load the data, execute the sweep, write artifacts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{DataSource, ExperimentConfig, ScalarKind};
use super::report::{summary_table, write_runs_csv, RunRecord};
use super::{io_err, ExperimentError};
use crate::graph::{generate_synthetic, load_graph, split_edges, EdgeSplit, Graph, SplitRatios};
use crate::scalar::Real;
use crate::seed::derive_seed;
use crate::trainer::{run_baseline, SharingMode, TrainConfig, TrainOutcome, Variant};

/// Evaluation negatives per positive in the validation and test splits.
pub const NEGATIVES_PER_POSITIVE: usize = 3;

/// Paths of everything [`cmd_run`] wrote, plus the per-run records.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub records: Vec<RunRecord>,
    pub metrics: PathBuf,
    pub ledger: PathBuf,
    pub runs: PathBuf,
    pub summary: PathBuf,
    pub manifest: PathBuf,
}

fn data_seed(cfg: &ExperimentConfig) -> u64 {
    derive_seed(cfg.seed, &[0xda7a])
}

fn split_seed(cfg: &ExperimentConfig) -> u64 {
    derive_seed(cfg.seed, &[0x5b])
}

/// Builds the graph and its edge split as the config describes.
pub fn load_data(cfg: &ExperimentConfig) -> Result<(Graph, EdgeSplit), ExperimentError> {
    let g = match &cfg.data {
        DataSource::Synthetic { kind, feature_dim } => generate_synthetic(kind, *feature_dim, data_seed(cfg))?,
        DataSource::Files { edges, features } => load_graph(edges, features)?,
    };
    let split = split_edges(&g, SplitRatios::default(), NEGATIVES_PER_POSITIVE, split_seed(cfg))?;
    Ok((g, split))
}

#[derive(Debug, Clone)]
struct Point {
    run: usize,
    variant: Variant,
    num_parts: usize,
    alpha: Option<f64>,
}

/// Expands variants × part counts × alphas. Alpha only varies for variants
/// that share sparsified subgraphs; the centralized variant runs once.
fn sweep_points(cfg: &ExperimentConfig) -> Vec<Point> {
    let mut points = Vec::new();
    for &variant in &cfg.variants {
        let mut probe = cfg.train.clone();
        variant.apply(&mut probe);
        let alphas: Vec<Option<f64>> = if probe.sharing_mode == SharingMode::Sparsified {
            cfg.alpha_sweep.iter().copied().map(Some).collect()
        } else {
            vec![None]
        };
        let parts: &[usize] = if variant == Variant::Centralized { &[1] } else { &cfg.parts_sweep };
        for &num_parts in parts {
            for &alpha in &alphas {
                points.push(Point {
                    run: points.len(),
                    variant,
                    num_parts,
                    alpha,
                });
            }
        }
    }
    points
}

struct PointOutput {
    record: RunRecord,
    metrics: String,
    ledger: String,
}

fn run_point<T: Real>(
    g: &Graph,
    split: &EdgeSplit,
    cfg: &ExperimentConfig,
    pt: &Point,
) -> Result<PointOutput, ExperimentError> {
    let train = TrainConfig {
        num_parts: pt.num_parts,
        alpha: pt.alpha.unwrap_or(cfg.train.alpha),
        ..cfg.train.clone()
    };
    let label = format!(
        "run {} {} p={} alpha={}",
        pt.run,
        pt.variant,
        pt.num_parts,
        pt.alpha.map_or("-".into(), |a| a.to_string())
    );
    let out: TrainOutcome<T> = run_baseline(g, split, pt.variant, &train).map_err(|source| ExperimentError::Train {
        run: label,
        source,
    })?;
    let alpha = pt.alpha.map_or(String::new(), |a| a.to_string());
    let prefix = format!("{},{},{},{}", pt.run, pt.variant, pt.num_parts, alpha);

    let mut metrics = String::new();
    for m in &out.history {
        let val = m.val_hits.map_or(String::new(), |h| h.to_string());
        let _ = writeln!(
            metrics,
            "{prefix},{},{},{},{},{},{}",
            m.epoch, m.train_loss, val, m.k, m.feature_bytes, m.structure_bytes
        );
    }
    let mut raw = Vec::new();
    out.ledger
        .write_csv(&mut raw, train.epochs, out.num_workers)
        .expect("writing to memory");
    let mut ledger = String::new();
    for line in String::from_utf8(raw).expect("ascii").lines().skip(1) {
        let _ = writeln!(ledger, "{},{line}", pt.run);
    }

    let last = out.history.last().expect("at least one epoch");
    let best_val = out
        .history
        .iter()
        .find(|m| m.epoch == out.best_epoch)
        .and_then(|m| m.val_hits)
        .unwrap_or(0.0);
    let record = RunRecord {
        run: pt.run,
        variant: pt.variant.to_string(),
        num_parts: pt.num_parts,
        alpha: pt.alpha,
        epochs: train.epochs,
        best_epoch: out.best_epoch,
        val_hits: best_val,
        test_hits: out.test.primary(),
        k: last.k,
        feature_bytes: last.feature_bytes,
        structure_bytes: last.structure_bytes,
        setup_bytes: out.ledger.setup_total().total(),
    };
    Ok(PointOutput { record, metrics, ledger })
}

fn write_file(path: &Path, text: &str) -> Result<(), ExperimentError> {
    fs::write(path, text).map_err(io_err(path))
}

/// Runs every sweep point and writes `metrics.csv`, `ledger.csv`,
/// `runs.csv`, `summary.txt` and `manifest.txt` into the output directory.
/// Every file opens with the config hash and base seed.
pub fn cmd_run(cfg: &ExperimentConfig) -> Result<RunArtifacts, ExperimentError> {
    let (g, split) = load_data(cfg)?;
    let points = sweep_points(cfg);
    let one = |pt: &Point| match cfg.scalar {
        ScalarKind::F64 => run_point::<f64>(&g, &split, cfg, pt),
        ScalarKind::F32 => run_point::<f32>(&g, &split, cfg, pt),
    };
    let outputs: Vec<PointOutput> = if cfg.parallel {
        points.par_iter().map(one).collect::<Result<_, _>>()?
    } else {
        points.iter().map(one).collect::<Result<_, _>>()?
    };

    let dir = &cfg.output;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let hash = cfg.hash();
    let stamp = format!("# config_hash={hash} seed={}\n", cfg.seed);

    let mut metrics = stamp.clone();
    metrics.push_str("run,variant,num_parts,alpha,epoch,train_loss,val_hits,k,feature_bytes,structure_bytes\n");
    let mut ledger = stamp.clone();
    ledger.push_str("run,kind,epoch,worker,feature_bytes,structure_bytes\n");
    for o in &outputs {
        metrics.push_str(&o.metrics);
        ledger.push_str(&o.ledger);
    }
    let records: Vec<RunRecord> = outputs.into_iter().map(|o| o.record).collect();
    let mut runs = Vec::new();
    write_runs_csv(&records, &hash, cfg.seed, &mut runs).expect("writing to memory");

    let mut manifest = stamp;
    let s = &cfg.train.seeds;
    let _ = writeln!(manifest, "[seeds]");
    let _ = writeln!(manifest, "base = {}", cfg.seed);
    let _ = writeln!(manifest, "data = {}", data_seed(cfg));
    let _ = writeln!(manifest, "split = {}", split_seed(cfg));
    let _ = writeln!(manifest, "partition = {}", s.partition);
    let _ = writeln!(manifest, "sparsify = {}", s.sparsify);
    let _ = writeln!(manifest, "sample = {}", s.sample);
    let _ = writeln!(manifest, "init = {}", s.init);
    let _ = writeln!(manifest, "eval = {}", s.eval);
    let _ = writeln!(manifest, "[data]");
    let _ = writeln!(manifest, "nodes = {}", g.num_nodes());
    let _ = writeln!(manifest, "edges = {}", g.num_edges());
    let _ = writeln!(manifest, "feature_dim = {}", g.feature_dim());
    let _ = writeln!(manifest, "[resolved]");
    manifest.push_str(&cfg.canonical());

    let paths = RunArtifacts {
        metrics: dir.join("metrics.csv"),
        ledger: dir.join("ledger.csv"),
        runs: dir.join("runs.csv"),
        summary: dir.join("summary.txt"),
        manifest: dir.join("manifest.txt"),
        records,
    };
    write_file(&paths.metrics, &metrics)?;
    write_file(&paths.ledger, &ledger)?;
    write_file(&paths.runs, &String::from_utf8(runs).expect("ascii"))?;
    write_file(&paths.summary, &summary_table(&paths.records, &hash, cfg.seed))?;
    write_file(&paths.manifest, &manifest)?;
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::RawConfig;

    fn config(dir: &Path, extra: &str) -> ExperimentConfig {
        let text = format!(
            "[data]\nsynthetic = erdos_renyi\nn = 50\np = 0.15\nfeature_dim = 4\n[train]\nepochs = 5\nfanouts = 4,2\nbatch_size = 16\nhidden_dim = 4\n[experiment]\noutput = {}\n{extra}",
            dir.display()
        );
        RawConfig::parse(&text).unwrap().resolve().unwrap()
    }

    #[test]
    fn centralized_run_has_one_row_per_epoch_and_no_remote_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(dir.path(), "variants = centralized\n");
        let a = cmd_run(&cfg).unwrap();
        let metrics = fs::read_to_string(&a.metrics).unwrap();
        let rows: Vec<&str> = metrics.lines().skip(2).collect();
        assert_eq!(rows.len(), 5);
        assert!(rows.iter().all(|r| r.ends_with(",0,0")), "{metrics}");
        assert_eq!(a.records.len(), 1);
        assert_eq!(a.records[0].total_bytes(), 0);
        let manifest = fs::read_to_string(&a.manifest).unwrap();
        assert!(manifest.contains(&cfg.hash()));
        assert!(manifest.contains("train.epochs = 5"));
    }

    #[test]
    fn alpha_sweep_expands_only_sparsified_variants() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(
            dir.path(),
            "variants = splpg, splpg_plus, centralized\nalpha_sweep = 0.05,0.1,0.15,0.2\nparts_sweep = 2,4\n",
        );
        let pts = sweep_points(&cfg);
        assert_eq!(pts.len(), 4 * 2 + 2 + 1);
        assert!(pts.iter().filter(|p| p.variant != Variant::Splpg).all(|p| p.alpha.is_none()));
        assert_eq!(pts.iter().filter(|p| p.variant == Variant::Centralized).count(), 1);
    }
}
