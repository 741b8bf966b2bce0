//! Simulated data-parallel training: per-worker batches over partition
//! views, synchronized by gradient or model averaging, with byte accounting
//! of every remote fetch.

mod config;
mod ledger;
mod run;
mod sync;

use thiserror::Error;

pub use config::{Seeds, SharingMode, SyncMode, TrainConfig, Variant};
pub use ledger::{Bytes, CommLedger, EDGE_BYTES, WEIGHT_BYTES};
pub use run::{
    run_baseline, run_centralized, run_training, write_metrics_csv, EpochMetrics, TrainOutcome,
};
pub use sync::{sync_gradients, sync_models};

use crate::eval::EvalError;
use crate::graph::GraphError;
use crate::model::ModelError;
use crate::partition::PartitionError;
use crate::sampler::SampleError;
use crate::sparsify::SparsifyError;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("config key `{key}`: {reason}")]
    Config { key: &'static str, reason: String },
    #[error("graph: {0}")]
    Graph(#[from] GraphError),
    #[error("partition: {0}")]
    Partition(#[from] PartitionError),
    #[error("sparsify: {0}")]
    Sparsify(#[from] SparsifyError),
    #[error("sampler (epoch {epoch}, worker {worker}, batch {batch}): {source}")]
    Sample {
        epoch: usize,
        worker: usize,
        batch: usize,
        source: SampleError,
    },
    #[error("model (epoch {epoch}, worker {worker}, batch {batch}): {source}")]
    Model {
        epoch: usize,
        worker: usize,
        batch: usize,
        source: ModelError,
    },
    #[error("synchronization: {0}")]
    Sync(ModelError),
    #[error("evaluation: {0}")]
    Eval(#[from] EvalError),
    #[error("no worker owns a training edge")]
    NoTrainEdges,
}
