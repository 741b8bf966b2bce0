//! Experiment orchestration: config files, sweeps, artifacts and the
//! property-verification suite.

mod config;
mod dump;
mod report;
mod run;
mod verify;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{DataSource, ExperimentConfig, RawConfig, ScalarKind};
pub use dump::{dump_partition, dump_sparsified, SparsifyDump};
pub use report::{parse_runs_csv, summary_table, write_runs_csv, RunRecord};
pub use run::{cmd_run, load_data, RunArtifacts};
pub use verify::{cmd_verify, Fault, PropertyResult, VerifyReport};

use crate::graph::GraphError;
use crate::partition::PartitionError;
use crate::sparsify::SparsifyError;
use crate::trainer::TrainError;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("unknown config key {0}")]
    UnknownKey(String),
    #[error("missing required key {0}")]
    Missing(&'static str),
    #[error("invalid value for {key}: {reason}")]
    Invalid { key: String, reason: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("graph: {0}")]
    Graph(#[from] GraphError),
    #[error("partitioner: {0}")]
    Partition(#[from] PartitionError),
    #[error("sparsifier: {0}")]
    Sparsify(#[from] SparsifyError),
    #[error("trainer ({run}): {source}")]
    Train { run: String, source: TrainError },
    #[error("report: {0}")]
    Report(String),
    #[error("io on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl ExperimentError {
    /// True when the failure traces back to the configuration.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            ExperimentError::Config(_)
                | ExperimentError::Train {
                    source: TrainError::Config { .. },
                    ..
                }
        )
    }
}

pub(crate) fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    }
}
