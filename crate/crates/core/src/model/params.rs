use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ModelError;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Architecture {
    Gcn,
    Sage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PredictorKind {
    /// Three-layer MLP on the Hadamard product of the two embeddings.
    Mlp,
    /// Inner product of the two embeddings.
    Dot,
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Architecture::Gcn => "gcn",
            Architecture::Sage => "sage",
        })
    }
}

impl FromStr for Architecture {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "gcn" => Ok(Architecture::Gcn),
            "sage" | "graphsage" => Ok(Architecture::Sage),
            _ => Err(format!("unknown architecture {s:?}")),
        }
    }
}

impl fmt::Display for PredictorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PredictorKind::Mlp => "mlp",
            PredictorKind::Dot => "dot",
        })
    }
}

impl FromStr for PredictorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "mlp" => Ok(PredictorKind::Mlp),
            "dot" => Ok(PredictorKind::Dot),
            _ => Err(format!("unknown predictor {s:?}")),
        }
    }
}

/// Affine map `x ↦ x W + b` with `W` stored input-major (`in × out`).
#[derive(Debug, Clone, PartialEq)]
pub struct Linear<T> {
    pub weight: Array2<T>,
    pub bias: Array1<T>,
}

impl<T: Real> Linear<T> {
    pub fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Self {
            weight: Array2::zeros((fan_in, fan_out)),
            bias: Array1::zeros(fan_out),
        }
    }

    /// Glorot-uniform weights in `±√(6 / (fan_in + fan_out))`, zero bias.
    pub fn glorot(fan_in: usize, fan_out: usize, rng: &mut impl Rng) -> Self {
        let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
        Self {
            weight: Array2::from_shape_simple_fn((fan_in, fan_out), || {
                T::of(rng.random_range(-a..=a))
            }),
            bias: Array1::zeros(fan_out),
        }
    }

    pub fn fan_in(&self) -> usize {
        self.weight.nrows()
    }

    pub fn fan_out(&self) -> usize {
        self.weight.ncols()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelConfig {
    pub architecture: Architecture,
    pub predictor: PredictorKind,
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub num_layers: usize,
}

impl ModelConfig {
    pub fn new(architecture: Architecture, predictor: PredictorKind, input_dim: usize) -> Self {
        Self {
            architecture,
            predictor,
            input_dim,
            hidden_dim: 256,
            num_layers: 3,
        }
    }
}

/// Encoder layers plus optional predictor MLP. Also used as the gradient
/// container, since gradients share the parameters' shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<T> {
    architecture: Architecture,
    pub layers: Vec<Linear<T>>,
    pub predictor: Option<Vec<Linear<T>>>,
}

impl<T: Real> ModelParams<T> {
    fn shaped(cfg: &ModelConfig, mut make: impl FnMut(usize, usize) -> Linear<T>) -> Self {
        let width = match cfg.architecture {
            Architecture::Gcn => 1,
            Architecture::Sage => 2,
        };
        let mut layers = Vec::with_capacity(cfg.num_layers);
        let mut dim = cfg.input_dim;
        for _ in 0..cfg.num_layers {
            layers.push(make(width * dim, cfg.hidden_dim));
            dim = cfg.hidden_dim;
        }
        let predictor = match cfg.predictor {
            PredictorKind::Dot => None,
            PredictorKind::Mlp => {
                let h = cfg.hidden_dim;
                Some(vec![make(h, h), make(h, h), make(h, 1)])
            }
        };
        Self {
            architecture: cfg.architecture,
            layers,
            predictor,
        }
    }

    /// Glorot-initialized parameters, deterministic in `seed`.
    pub fn init(cfg: &ModelConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::shaped(cfg, |i, o| Linear::glorot(i, o, &mut rng))
    }

    pub fn zeros(cfg: &ModelConfig) -> Self {
        Self::shaped(cfg, Linear::zeros)
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            architecture: self.architecture,
            layers: self
                .layers
                .iter()
                .map(|l| Linear::zeros(l.fan_in(), l.fan_out()))
                .collect(),
            predictor: self.predictor.as_ref().map(|p| {
                p.iter()
                    .map(|l| Linear::zeros(l.fan_in(), l.fan_out()))
                    .collect()
            }),
        }
    }

    pub fn architecture(&self) -> Architecture {
        self.architecture
    }

    pub fn predictor_kind(&self) -> PredictorKind {
        if self.predictor.is_some() {
            PredictorKind::Mlp
        } else {
            PredictorKind::Dot
        }
    }

    pub fn input_dim(&self) -> usize {
        let width = match self.architecture {
            Architecture::Gcn => 1,
            Architecture::Sage => 2,
        };
        self.layers[0].fan_in() / width
    }

    pub fn hidden_dim(&self) -> usize {
        self.layers.last().map_or(0, Linear::fan_out)
    }

    fn linears(&self) -> impl Iterator<Item = &Linear<T>> {
        self.layers.iter().chain(self.predictor.iter().flatten())
    }

    fn linears_mut(&mut self) -> impl Iterator<Item = &mut Linear<T>> {
        self.layers.iter_mut().chain(self.predictor.iter_mut().flatten())
    }

    /// Every tensor as a flat row-major slice: weight then bias, encoder
    /// layers first.
    pub fn tensors(&self) -> Vec<&[T]> {
        self.linears()
            .flat_map(|l| {
                [
                    l.weight.as_slice().expect("standard layout"),
                    l.bias.as_slice().expect("standard layout"),
                ]
            })
            .collect()
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [T]> {
        self.linears_mut()
            .flat_map(|l| {
                [
                    l.weight.as_slice_mut().expect("standard layout"),
                    l.bias.as_slice_mut().expect("standard layout"),
                ]
            })
            .collect()
    }

    /// `(name, shape)` per tensor, in [`ModelParams::tensors`] order.
    pub fn tensor_specs(&self) -> Vec<(String, Vec<usize>)> {
        let mut out = Vec::new();
        for (i, l) in self.layers.iter().enumerate() {
            out.push((format!("encoder.{i}.weight"), l.weight.shape().to_vec()));
            out.push((format!("encoder.{i}.bias"), l.bias.shape().to_vec()));
        }
        for (i, l) in self.predictor.iter().flatten().enumerate() {
            out.push((format!("predictor.{i}.weight"), l.weight.shape().to_vec()));
            out.push((format!("predictor.{i}.bias"), l.bias.shape().to_vec()));
        }
        out
    }

    pub fn num_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|x| x.is_finite()))
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.architecture == other.architecture && self.tensor_specs() == other.tensor_specs()
    }

    pub(crate) fn check_same_shape(&self, other: &Self) -> Result<(), ModelError> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(ModelError::Shape {
                what: "parameter set",
                expected: self.tensor_specs().into_iter().flat_map(|(_, s)| s).collect(),
                found: other.tensor_specs().into_iter().flat_map(|(_, s)| s).collect(),
            })
        }
    }

    /// Multiplies every entry by `s`.
    pub fn scale(&mut self, s: T) {
        for t in self.tensors_mut() {
            t.iter_mut().for_each(|x| *x = *x * s);
        }
    }

    /// Adds `other` entrywise.
    pub fn add_assign(&mut self, other: &Self) -> Result<(), ModelError> {
        self.check_same_shape(other)?;
        for (a, b) in self.tensors_mut().into_iter().zip(other.tensors()) {
            a.iter_mut().zip(b).for_each(|(x, &y)| *x = *x + y);
        }
        Ok(())
    }

    /// Flat copy of every parameter.
    pub fn to_flat(&self) -> Vec<T> {
        self.tensors().concat()
    }

    /// Entry `index` of the flattened parameter vector.
    pub fn get_flat(&self, mut index: usize) -> T {
        for t in self.tensors() {
            if index < t.len() {
                return t[index];
            }
            index -= t.len();
        }
        panic!("flat index out of range");
    }

    pub fn set_flat(&mut self, mut index: usize, value: T) {
        for t in self.tensors_mut() {
            if index < t.len() {
                t[index] = value;
                return;
            }
            index -= t.len();
        }
        panic!("flat index out of range");
    }
}
