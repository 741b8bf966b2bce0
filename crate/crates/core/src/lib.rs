//! Simulator for partitioned GNN link-prediction training in which workers
//! share importance-sampled sparsifications of their subgraphs.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the common choices.

pub mod csr;
pub mod eval;
pub mod experiment;
pub mod graph;
pub mod model;
pub mod partition;
pub mod sampler;
pub mod scalar;
pub mod seed;
pub mod sparsify;
pub mod trainer;

pub use graph::{EdgeSplit, Graph, GraphError};
pub use scalar::Real;

pub type Model = model::ModelParams<f64>;
pub type Model32 = model::ModelParams<f32>;
pub type Optimizer = model::OptimizerState<f64>;
pub type Optimizer32 = model::OptimizerState<f32>;
pub type SparsifiedSubgraph64 = sparsify::SparsifiedSubgraph<f64>;
pub type SparsifiedSubgraph32 = sparsify::SparsifiedSubgraph<f32>;
pub type TrainOutcome64 = trainer::TrainOutcome<f64>;
pub type TrainOutcome32 = trainer::TrainOutcome<f32>;
