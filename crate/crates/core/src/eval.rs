//! Hits@K link-prediction evaluation against fixed negative sets.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{EdgeSplit, Graph};
use crate::model::{forward_embeddings, score_pairs, ModelError, ModelParams};
use crate::sampler::{build_computation_graph, GraphView, SampleError};
use crate::scalar::Real;
use crate::seed::derive_seed;

/// Pairs scored per computation graph during evaluation.
pub const EVAL_CHUNK: usize = 512;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("hits@{k} needs at least {k} negatives, got {available}")]
    TooFewNegatives { k: usize, available: usize },
    #[error("k must be positive")]
    ZeroK,
    #[error("no positive pairs to score")]
    NoPositives,
    #[error("score is NaN")]
    NanScore,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sample(#[from] SampleError),
}

/// Fraction of positives scoring strictly above the `k`-th highest negative.
pub fn hits_at_k<T: Real>(pos: &[T], neg: &[T], k: usize) -> Result<f64, EvalError> {
    if k == 0 {
        return Err(EvalError::ZeroK);
    }
    if neg.len() < k {
        return Err(EvalError::TooFewNegatives {
            k,
            available: neg.len(),
        });
    }
    if pos.is_empty() {
        return Err(EvalError::NoPositives);
    }
    if pos.iter().chain(neg).any(|x| x.is_nan()) {
        return Err(EvalError::NanScore);
    }
    let mut sorted = neg.to_vec();
    sorted.sort_unstable_by(|a, b| b.partial_cmp(a).expect("no NaN"));
    let threshold = sorted[k - 1];
    let hits = pos.iter().filter(|&&s| s > threshold).count();
    Ok(hits as f64 / pos.len() as f64)
}

/// `min(100, |neg| / 3)`, at least 1.
pub fn default_k(num_negatives: usize) -> usize {
    (num_negatives / 3).clamp(1, 100)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalSet {
    Validation,
    Test,
}

impl EvalSet {
    fn tag(self) -> u64 {
        match self {
            EvalSet::Validation => 1,
            EvalSet::Test => 2,
        }
    }

    pub fn pairs(self, split: &EdgeSplit) -> (&[(usize, usize)], &[(usize, usize)]) {
        match self {
            EvalSet::Validation => (&split.val_pos, &split.val_neg),
            EvalSet::Test => (&split.test_pos, &split.test_neg),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub epoch: usize,
    pub variant: String,
    pub set: EvalSet,
    /// `(k, hits@k)` in ascending `k`.
    pub hits: Vec<(usize, f64)>,
    pub pos_mean: f64,
    pub neg_mean: f64,
    pub num_pos: usize,
    pub num_neg: usize,
}

impl EvalReport {
    pub fn hits_at(&self, k: usize) -> Option<f64> {
        self.hits.iter().find(|&&(kk, _)| kk == k).map(|&(_, h)| h)
    }

    /// Hits at the largest evaluated `k`.
    pub fn primary(&self) -> f64 {
        self.hits.last().map_or(0.0, |&(_, h)| h)
    }
}

/// Scores `pairs` on the centralized view of `g`, in chunks of
/// [`EVAL_CHUNK`], each with its own fanout-sampled computation graph.
pub fn score_on_graph<T: Real>(
    params: &ModelParams<T>,
    g: &Graph,
    pairs: &[(usize, usize)],
    fanouts: &[usize],
    seed: u64,
) -> Result<Vec<T>, EvalError> {
    let view = GraphView::full(g);
    let mut out = Vec::with_capacity(pairs.len());
    for (c, chunk) in pairs.chunks(EVAL_CHUNK).enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[c as u64]));
        let seeds: Vec<usize> = chunk.iter().flat_map(|&(u, v)| [u, v]).collect();
        let cg = build_computation_graph(&seeds, &view, fanouts, &mut rng)?;
        let emb = forward_embeddings(&cg, g.features(), params)?;
        out.extend(score_pairs(&cg, &emb, chunk, params)?);
    }
    Ok(out)
}

/// Scores the positives and fixed negatives of `set` and reports Hits@K for
/// every `k` in `ks`. Deterministic in `seed`.
pub fn evaluate_model<T: Real>(
    params: &ModelParams<T>,
    split: &EdgeSplit,
    set: EvalSet,
    g: &Graph,
    fanouts: &[usize],
    ks: &[usize],
    seed: u64,
) -> Result<EvalReport, EvalError> {
    let (pos_pairs, neg_pairs) = set.pairs(split);
    if let Some(&k) = ks.iter().find(|&&k| k > neg_pairs.len()) {
        return Err(EvalError::TooFewNegatives {
            k,
            available: neg_pairs.len(),
        });
    }
    let s = derive_seed(seed, &[set.tag()]);
    let pos = score_on_graph(params, g, pos_pairs, fanouts, derive_seed(s, &[1]))?;
    let neg = score_on_graph(params, g, neg_pairs, fanouts, derive_seed(s, &[0]))?;
    let mut ks = ks.to_vec();
    ks.sort_unstable();
    ks.dedup();
    let hits = ks
        .iter()
        .map(|&k| Ok((k, hits_at_k(&pos, &neg, k)?)))
        .collect::<Result<_, EvalError>>()?;
    let mean = |x: &[T]| x.iter().map(|v| v.as_f64()).sum::<f64>() / x.len().max(1) as f64;
    Ok(EvalReport {
        epoch: 0,
        variant: String::new(),
        set,
        hits,
        pos_mean: mean(&pos),
        neg_mean: mean(&neg),
        num_pos: pos.len(),
        num_neg: neg.len(),
    })
}
