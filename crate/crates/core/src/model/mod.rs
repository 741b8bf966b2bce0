//! GCN / GraphSAGE encoders with dot or MLP edge predictors, binary
//! cross-entropy, hand-written reverse-mode gradients, and Adam.

mod adam;
mod checkpoint;
mod forward;
mod gradcheck;
mod loss;
mod params;

use thiserror::Error;

pub use adam::{adam_step, AdamConfig, OptimizerState};
pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_VERSION};
pub use forward::{
    edge_score, forward_embeddings, gather_features, loss_and_gradients, relu_pattern, score_pairs,
    Forward,
};
pub use gradcheck::{gradient_check, GradientCheck};
pub use loss::{bce_loss, sigmoid};
pub use params::{Architecture, Linear, ModelConfig, ModelParams, PredictorKind};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("shape mismatch in {what}: expected {expected:?}, found {found:?}")]
    Shape {
        what: &'static str,
        expected: Vec<usize>,
        found: Vec<usize>,
    },
    #[error("non-finite value in {stage} (layer {layer})")]
    NonFinite { stage: &'static str, layer: usize },
    #[error("empty batch")]
    EmptyBatch,
    #[error("label {0} is not 0 or 1")]
    BadLabel(f64),
    #[error("pair endpoint {0} is not a seed of the computation graph")]
    MissingSeed(usize),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
