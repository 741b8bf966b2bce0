use ndarray::{concatenate, s, Array1, Array2, ArrayView1, Axis};

use super::loss::{bce_loss, sigmoid};
use super::params::{Architecture, Linear, ModelParams};
use super::ModelError;
use crate::sampler::{Block, ComputationGraph};
use crate::scalar::Real;

/// Sparse aggregation over one block: `out[i] = Σ coef · h[src]`.
#[derive(Debug, Clone)]
struct Aggregator<T> {
    offsets: Vec<usize>,
    src: Vec<usize>,
    coef: Vec<T>,
}

impl<T: Real> Aggregator<T> {
    /// Symmetric normalization with a unit self loop on both sides:
    /// `c_ij = w_ij / √(d̃_i d̃_j)`, degrees taken over the sampled block.
    fn gcn(b: &Block) -> Self {
        let nd = b.num_dst();
        let mut out_deg = vec![0.0f64; b.num_src()];
        out_deg[..nd].iter_mut().for_each(|d| *d = 1.0);
        let mut in_deg = vec![1.0f64; nd];
        for i in 0..nd {
            let (src, w) = b.neighbors(i);
            for (&j, &wij) in src.iter().zip(w) {
                in_deg[i] += wij;
                out_deg[j as usize] += wij;
            }
        }
        let mut offsets = Vec::with_capacity(nd + 1);
        let mut src_out = Vec::with_capacity(b.num_edges() + nd);
        let mut coef = Vec::with_capacity(b.num_edges() + nd);
        offsets.push(0);
        for i in 0..nd {
            src_out.push(i);
            coef.push(T::of(1.0 / (in_deg[i] * out_deg[i]).sqrt()));
            let (src, w) = b.neighbors(i);
            for (&j, &wij) in src.iter().zip(w) {
                let j = j as usize;
                src_out.push(j);
                coef.push(T::of(wij / (in_deg[i] * out_deg[j]).sqrt()));
            }
            offsets.push(src_out.len());
        }
        Self {
            offsets,
            src: src_out,
            coef,
        }
    }

    /// Weighted mean over sampled neighbors; empty neighborhoods give zero.
    fn mean(b: &Block) -> Self {
        let nd = b.num_dst();
        let mut offsets = Vec::with_capacity(nd + 1);
        let mut src_out = Vec::with_capacity(b.num_edges());
        let mut coef = Vec::with_capacity(b.num_edges());
        offsets.push(0);
        for i in 0..nd {
            let (src, w) = b.neighbors(i);
            let total: f64 = w.iter().sum();
            if total > 0.0 {
                for (&j, &wij) in src.iter().zip(w) {
                    src_out.push(j as usize);
                    coef.push(T::of(wij / total));
                }
            }
            offsets.push(src_out.len());
        }
        Self {
            offsets,
            src: src_out,
            coef,
        }
    }

    fn num_dst(&self) -> usize {
        self.offsets.len() - 1
    }

    fn apply(&self, h: &Array2<T>) -> Array2<T> {
        let mut out = Array2::zeros((self.num_dst(), h.ncols()));
        for (i, mut row) in out.outer_iter_mut().enumerate() {
            for e in self.offsets[i]..self.offsets[i + 1] {
                row.scaled_add(self.coef[e], &h.row(self.src[e]));
            }
        }
        out
    }

    /// `d_in += Aᵀ d_out`.
    fn apply_transpose(&self, d_out: ndarray::ArrayView2<'_, T>, d_in: &mut Array2<T>) {
        for (i, row) in d_out.outer_iter().enumerate() {
            for e in self.offsets[i]..self.offsets[i + 1] {
                d_in.row_mut(self.src[e]).scaled_add(self.coef[e], &row);
            }
        }
    }
}

/// Copies the feature rows of every computation-graph node, in layer order.
pub fn gather_features<T: Real>(
    cg: &ComputationGraph,
    features: &Array2<f32>,
) -> Result<Array2<T>, ModelError> {
    let nodes = cg.all_nodes();
    let dim = features.ncols();
    let mut h = Array2::zeros((nodes.len(), dim));
    for (mut row, &v) in h.outer_iter_mut().zip(nodes) {
        let v = v as usize;
        if v >= features.nrows() {
            return Err(ModelError::Shape {
                what: "feature rows",
                expected: vec![v + 1, dim],
                found: features.shape().to_vec(),
            });
        }
        for (dst, &x) in row.iter_mut().zip(features.row(v)) {
            if !x.is_finite() {
                return Err(ModelError::NonFinite {
                    stage: "input features",
                    layer: 0,
                });
            }
            *dst = T::of(x as f64);
        }
    }
    Ok(h)
}

fn linear<T: Real>(x: &Array2<T>, l: &Linear<T>) -> Array2<T> {
    let mut z = x.dot(&l.weight);
    z += &l.bias;
    z
}

fn relu<T: Real>(z: &Array2<T>) -> Array2<T> {
    z.mapv(|x| x.max(T::zero()))
}

fn check_finite<T: Real>(a: &Array2<T>, stage: &'static str, layer: usize) -> Result<(), ModelError> {
    if a.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(ModelError::NonFinite { stage, layer })
    }
}

/// Encoder activations retained for the backward pass.
#[derive(Debug, Clone)]
pub struct Forward<T> {
    aggregators: Vec<Aggregator<T>>,
    /// `inputs[i]` feeds encoder layer `i`; rows follow `layers[K − i]`.
    inputs: Vec<Array2<T>>,
    combined: Vec<Array2<T>>,
    pre: Vec<Array2<T>>,
    /// Final embeddings, one row per seed.
    pub embeddings: Array2<T>,
}

impl<T: Real> Forward<T> {
    /// Runs the encoder on `cg`. Layer `i` consumes block `K − 1 − i`, so the
    /// outermost hop is aggregated first.
    pub fn run(
        cg: &ComputationGraph,
        features: &Array2<f32>,
        params: &ModelParams<T>,
    ) -> Result<Self, ModelError> {
        let k = params.layers.len();
        if cg.depth() != k {
            return Err(ModelError::Shape {
                what: "encoder depth vs computation graph",
                expected: vec![k],
                found: vec![cg.depth()],
            });
        }
        if features.ncols() != params.input_dim() {
            return Err(ModelError::Shape {
                what: "feature dimension",
                expected: vec![params.input_dim()],
                found: vec![features.ncols()],
            });
        }
        let mut h = gather_features(cg, features)?;
        let mut aggregators = Vec::with_capacity(k);
        let mut inputs = Vec::with_capacity(k);
        let mut combined = Vec::with_capacity(k);
        let mut pre = Vec::with_capacity(k);
        for (i, layer) in params.layers.iter().enumerate() {
            let block = &cg.blocks()[k - 1 - i];
            let nd = block.num_dst();
            let (agg, x) = match params.architecture() {
                Architecture::Gcn => {
                    let a = Aggregator::gcn(block);
                    let x = a.apply(&h);
                    (a, x)
                }
                Architecture::Sage => {
                    let a = Aggregator::mean(block);
                    let m = a.apply(&h);
                    let x = concatenate(Axis(1), &[h.slice(s![..nd, ..]), m.view()])
                        .expect("row counts agree");
                    (a, x)
                }
            };
            let z = linear(&x, layer);
            check_finite(&z, "encoder forward", i)?;
            let next = if i + 1 < k { relu(&z) } else { z.clone() };
            aggregators.push(agg);
            inputs.push(std::mem::replace(&mut h, next));
            combined.push(x);
            pre.push(z);
        }
        Ok(Self {
            aggregators,
            inputs,
            combined,
            pre,
            embeddings: h,
        })
    }

    /// Back-propagates `d_emb` (gradient w.r.t. the seed embeddings) into the
    /// encoder parameters of `grads`.
    fn backward(
        &self,
        params: &ModelParams<T>,
        mut d_h: Array2<T>,
        grads: &mut ModelParams<T>,
    ) -> Result<(), ModelError> {
        let k = params.layers.len();
        for i in (0..k).rev() {
            let mut d_z = d_h;
            if i + 1 < k {
                d_z.zip_mut_with(&self.pre[i], |g, &z| {
                    if z <= T::zero() {
                        *g = T::zero();
                    }
                });
            }
            let g = &mut grads.layers[i];
            g.weight += &self.combined[i].t().dot(&d_z);
            g.bias += &d_z.sum_axis(Axis(0));
            check_finite(&g.weight, "encoder backward", i)?;
            if i == 0 {
                break;
            }
            let d_x = d_z.dot(&params.layers[i].weight.t());
            let input = &self.inputs[i];
            let mut d_in = Array2::zeros(input.raw_dim());
            match params.architecture() {
                Architecture::Gcn => self.aggregators[i].apply_transpose(d_x.view(), &mut d_in),
                Architecture::Sage => {
                    let dim = input.ncols();
                    let nd = d_x.nrows();
                    d_in.slice_mut(s![..nd, ..]).assign(&d_x.slice(s![.., ..dim]));
                    self.aggregators[i].apply_transpose(d_x.slice(s![.., dim..]), &mut d_in);
                }
            }
            d_h = d_in;
        }
        Ok(())
    }
}

/// Seed embeddings of `cg` under `params`.
pub fn forward_embeddings<T: Real>(
    cg: &ComputationGraph,
    features: &Array2<f32>,
    params: &ModelParams<T>,
) -> Result<Array2<T>, ModelError> {
    Forward::run(cg, features, params).map(|f| f.embeddings)
}

/// Logit for one pair of embeddings.
pub fn edge_score<T: Real>(
    h_u: ArrayView1<'_, T>,
    h_v: ArrayView1<'_, T>,
    params: &ModelParams<T>,
) -> Result<T, ModelError> {
    let dim = params.hidden_dim();
    if h_u.len() != dim || h_v.len() != dim {
        return Err(ModelError::Shape {
            what: "embedding dimension",
            expected: vec![dim, dim],
            found: vec![h_u.len(), h_v.len()],
        });
    }
    let x = (&h_u * &h_v).insert_axis(Axis(0));
    Ok(PredictorPass::run(x, params).scores[0])
}

/// Predictor activations for a batch of Hadamard inputs.
struct PredictorPass<T> {
    x: Array2<T>,
    pre: Vec<Array2<T>>,
    scores: Array1<T>,
}

impl<T: Real> PredictorPass<T> {
    fn run(x: Array2<T>, params: &ModelParams<T>) -> Self {
        match &params.predictor {
            None => {
                let scores = x.sum_axis(Axis(1));
                Self {
                    x,
                    pre: Vec::new(),
                    scores,
                }
            }
            Some(mlp) => {
                let mut pre = Vec::with_capacity(mlp.len());
                let mut a = x.clone();
                for (j, l) in mlp.iter().enumerate() {
                    let z = linear(&a, l);
                    a = if j + 1 < mlp.len() { relu(&z) } else { z.clone() };
                    pre.push(z);
                }
                let scores = a.column(0).to_owned();
                Self { x, pre, scores }
            }
        }
    }

    /// Returns the gradient w.r.t. the Hadamard input.
    fn backward(&self, params: &ModelParams<T>, d_s: &Array1<T>, grads: &mut ModelParams<T>) -> Array2<T> {
        let (Some(mlp), Some(g_mlp)) = (&params.predictor, &mut grads.predictor) else {
            let mut d_x = Array2::zeros(self.x.raw_dim());
            for (mut row, &d) in d_x.outer_iter_mut().zip(d_s) {
                row.fill(d);
            }
            return d_x;
        };
        let mut d_z = d_s.clone().insert_axis(Axis(1));
        for j in (0..mlp.len()).rev() {
            let input = if j == 0 {
                self.x.clone()
            } else {
                relu(&self.pre[j - 1])
            };
            g_mlp[j].weight += &input.t().dot(&d_z);
            g_mlp[j].bias += &d_z.sum_axis(Axis(0));
            let mut d_a = d_z.dot(&mlp[j].weight.t());
            if j > 0 {
                d_a.zip_mut_with(&self.pre[j - 1], |g, &z| {
                    if z <= T::zero() {
                        *g = T::zero();
                    }
                });
            }
            d_z = d_a;
        }
        d_z
    }
}

fn seed_positions(
    cg: &ComputationGraph,
    pairs: &[(usize, usize)],
) -> Result<Vec<(usize, usize)>, ModelError> {
    let seeds = cg.seeds().len();
    let pos = |v: usize| {
        cg.position(v)
            .filter(|&p| p < seeds)
            .ok_or(ModelError::MissingSeed(v))
    };
    pairs.iter().map(|&(u, v)| Ok((pos(u)?, pos(v)?))).collect()
}

fn hadamard<T: Real>(emb: &Array2<T>, pos: &[(usize, usize)]) -> Array2<T> {
    let mut x = Array2::zeros((pos.len(), emb.ncols()));
    for (mut row, &(a, b)) in x.outer_iter_mut().zip(pos) {
        row.assign(&(&emb.row(a) * &emb.row(b)));
    }
    x
}

/// Logits for `pairs` (global ids, all seeds of `cg`) given precomputed seed
/// embeddings.
pub fn score_pairs<T: Real>(
    cg: &ComputationGraph,
    embeddings: &Array2<T>,
    pairs: &[(usize, usize)],
    params: &ModelParams<T>,
) -> Result<Vec<T>, ModelError> {
    let pos = seed_positions(cg, pairs)?;
    Ok(PredictorPass::run(hadamard(embeddings, &pos), params).scores.to_vec())
}

/// Mean BCE of the batch `pairs` with `labels`, and its exact gradient.
pub fn loss_and_gradients<T: Real>(
    cg: &ComputationGraph,
    features: &Array2<f32>,
    params: &ModelParams<T>,
    pairs: &[(usize, usize)],
    labels: &[T],
) -> Result<(T, ModelParams<T>), ModelError> {
    let fwd = Forward::run(cg, features, params)?;
    let pos = seed_positions(cg, pairs)?;
    let pass = PredictorPass::run(hadamard(&fwd.embeddings, &pos), params);
    let scores = pass.scores.as_slice().expect("contiguous");
    let loss = bce_loss(scores, labels)?;
    if !loss.is_finite() {
        return Err(ModelError::NonFinite {
            stage: "loss",
            layer: params.layers.len(),
        });
    }
    let n = T::of_usize(pairs.len());
    let d_s: Array1<T> = scores
        .iter()
        .zip(labels)
        .map(|(&s, &y)| (sigmoid(s) - y) / n)
        .collect();
    let mut grads = params.zeros_like();
    let d_x = pass.backward(params, &d_s, &mut grads);
    let emb = &fwd.embeddings;
    let mut d_h = Array2::zeros(emb.raw_dim());
    for (row, &(a, b)) in d_x.outer_iter().zip(&pos) {
        d_h.row_mut(a).scaled_add(T::one(), &(&row * &emb.row(b)));
        d_h.row_mut(b).scaled_add(T::one(), &(&row * &emb.row(a)));
    }
    fwd.backward(params, d_h, &mut grads)?;
    Ok((loss, grads))
}

/// Sign of every ReLU input (encoder hidden layers, then predictor hidden
/// layers). The loss is smooth wherever this pattern is locally constant.
pub fn relu_pattern<T: Real>(
    cg: &ComputationGraph,
    features: &Array2<f32>,
    params: &ModelParams<T>,
    pairs: &[(usize, usize)],
) -> Result<Vec<bool>, ModelError> {
    let fwd = Forward::run(cg, features, params)?;
    let pos = seed_positions(cg, pairs)?;
    let pass = PredictorPass::run(hadamard(&fwd.embeddings, &pos), params);
    let k = fwd.pre.len();
    let hidden_pred = pass.pre.len().saturating_sub(1);
    Ok(fwd.pre[..k - 1]
        .iter()
        .chain(&pass.pre[..hidden_pred])
        .flat_map(|z| z.iter().map(|&x| x > T::zero()))
        .collect())
}
