use std::fmt;
use std::str::FromStr;

use crate::model::{AdamConfig, Architecture, ModelConfig, PredictorKind};
use crate::partition::Strategy;
use crate::seed::derive_seed;
use crate::sparsify::DegreeSource;

use super::TrainError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyncMode {
    GradientAvg,
    ModelAvg,
}

/// What a worker can fetch for nodes it does not own.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SharingMode {
    None,
    Complete,
    Sparsified,
}

/// Named training setups compared in the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    PsgdPa,
    RandomTma,
    SuperTma,
    SplpgMinusMinus,
    SplpgMinus,
    Splpg,
    SplpgPlus,
    Centralized,
}

impl Variant {
    pub const ALL: [Variant; 8] = [
        Variant::PsgdPa,
        Variant::RandomTma,
        Variant::SuperTma,
        Variant::SplpgMinusMinus,
        Variant::SplpgMinus,
        Variant::Splpg,
        Variant::SplpgPlus,
        Variant::Centralized,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::PsgdPa => "psgd_pa",
            Variant::RandomTma => "random_tma",
            Variant::SuperTma => "super_tma",
            Variant::SplpgMinusMinus => "splpg_minus_minus",
            Variant::SplpgMinus => "splpg_minus",
            Variant::Splpg => "splpg",
            Variant::SplpgPlus => "splpg_plus",
            Variant::Centralized => "centralized",
        }
    }

    /// Sets the partitioner, halo, sharing and negative-scope flags.
    pub fn apply(self, cfg: &mut TrainConfig) {
        let (strategy, halo, sharing, local_neg) = match self {
            Variant::PsgdPa | Variant::SplpgMinusMinus => {
                (Strategy::GreedyCut, false, SharingMode::None, true)
            }
            Variant::RandomTma => (Strategy::RandomTma, false, SharingMode::None, true),
            Variant::SuperTma => (Strategy::SuperTma, false, SharingMode::None, true),
            Variant::SplpgMinus => (Strategy::GreedyCut, true, SharingMode::None, true),
            Variant::Splpg => (Strategy::GreedyCut, true, SharingMode::Sparsified, false),
            Variant::SplpgPlus => (Strategy::GreedyCut, true, SharingMode::Complete, false),
            Variant::Centralized => {
                cfg.num_parts = 1;
                (Strategy::GreedyCut, true, SharingMode::None, false)
            }
        };
        cfg.strategy = strategy;
        cfg.full_neighbor_halo = halo;
        cfg.sharing_mode = sharing;
        cfg.local_only_negatives = local_neg;
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown variant {s:?}"))
    }
}

macro_rules! named_enum {
    ($t:ty { $($name:literal => $v:expr),+ $(,)? }) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                $(if *self == $v { return f.write_str($name); })+
                unreachable!()
            }
        }

        impl FromStr for $t {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($name => Ok($v),)+
                    _ => Err(format!("unrecognized value {s:?}")),
                }
            }
        }
    };
}

named_enum!(SyncMode { "gradient_avg" => SyncMode::GradientAvg, "model_avg" => SyncMode::ModelAvg });
named_enum!(SharingMode {
    "none" => SharingMode::None,
    "complete" => SharingMode::Complete,
    "sparsified" => SharingMode::Sparsified,
});

/// Independent seed streams, all derived from one base seed by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Seeds {
    pub partition: u64,
    pub sparsify: u64,
    pub sample: u64,
    pub init: u64,
    pub eval: u64,
}

impl Seeds {
    pub fn from_base(base: u64) -> Self {
        Self {
            partition: derive_seed(base, &[1]),
            sparsify: derive_seed(base, &[2]),
            sample: derive_seed(base, &[3]),
            init: derive_seed(base, &[4]),
            eval: derive_seed(base, &[5]),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub num_parts: usize,
    pub alpha: f64,
    pub fanouts: Vec<usize>,
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub epochs: usize,
    pub sync_mode: SyncMode,
    /// Batches between model-averaging rounds; replicas are also averaged at
    /// every epoch end.
    pub sync_period: usize,
    pub sharing_mode: SharingMode,
    pub strategy: Strategy,
    pub num_miniclusters: usize,
    pub architecture: Architecture,
    pub predictor: PredictorKind,
    pub hidden_dim: usize,
    pub full_neighbor_halo: bool,
    /// Draw negative destinations only from the worker's own subgraph
    /// (owned nodes, plus the halo when `full_neighbor_halo` is set).
    pub local_only_negatives: bool,
    pub use_edge_weights: bool,
    /// Keep each batch's positive edges out of its own message passing.
    pub exclude_target_edges: bool,
    pub degree_source: DegreeSource,
    /// Validate every this many epochs (the last epoch always validates).
    pub eval_every: usize,
    /// Hits@K cutoff; `None` uses [`crate::eval::default_k`].
    pub eval_k: Option<usize>,
    pub seeds: Seeds,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            num_parts: 4,
            alpha: 0.15,
            fanouts: vec![25, 10, 5],
            batch_size: 256,
            adam: AdamConfig::default(),
            epochs: 100,
            sync_mode: SyncMode::ModelAvg,
            sync_period: 1,
            sharing_mode: SharingMode::Sparsified,
            strategy: Strategy::GreedyCut,
            num_miniclusters: 64,
            architecture: Architecture::Sage,
            predictor: PredictorKind::Mlp,
            hidden_dim: 256,
            full_neighbor_halo: true,
            local_only_negatives: false,
            use_edge_weights: true,
            exclude_target_edges: true,
            degree_source: DegreeSource::Local,
            eval_every: 1,
            eval_k: None,
            seeds: Seeds::from_base(0),
        }
    }
}

impl TrainConfig {
    pub fn for_variant(variant: Variant) -> Self {
        let mut cfg = Self::default();
        variant.apply(&mut cfg);
        cfg
    }

    pub fn model_config(&self, input_dim: usize) -> ModelConfig {
        ModelConfig {
            architecture: self.architecture,
            predictor: self.predictor,
            input_dim,
            hidden_dim: self.hidden_dim,
            num_layers: self.fanouts.len(),
        }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |key: &'static str, reason: String| Err(TrainError::Config { key, reason });
        if self.num_parts == 0 {
            return bad("num_parts", "must be at least 1".into());
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad("alpha", format!("must lie in (0, 1], got {}", self.alpha));
        }
        if self.fanouts.is_empty() || self.fanouts.contains(&0) {
            return bad("fanouts", format!("must be non-empty and positive, got {:?}", self.fanouts));
        }
        if self.batch_size < 2 {
            return bad("batch_size", "must be at least 2".into());
        }
        if self.epochs == 0 {
            return bad("epochs", "must be at least 1".into());
        }
        if self.sync_period == 0 {
            return bad("sync_period", "must be at least 1".into());
        }
        if self.hidden_dim == 0 {
            return bad("hidden_dim", "must be positive".into());
        }
        if self.eval_every == 0 {
            return bad("eval_every", "must be at least 1".into());
        }
        if !(self.adam.lr > 0.0 && self.adam.lr.is_finite()) {
            return bad("lr", format!("must be positive, got {}", self.adam.lr));
        }
        if self.eval_k == Some(0) {
            return bad("eval_k", "must be positive".into());
        }
        Ok(())
    }
}
