//! Train/validation/test edge splits with fixed evaluation negatives.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Graph, GraphError};
use crate::sampler::negative_global_uniform;
use crate::seed::derive_seed;

/// Fractions of undirected edges assigned to train, validation and test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitRatios {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self {
            train: 0.8,
            val: 0.1,
            test: 0.1,
        }
    }
}

/// Disjoint partition of the edge set plus fixed negative pairs for
/// validation and test. Pairs are stored with the smaller id first.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSplit {
    pub train_pos: Vec<(usize, usize)>,
    pub val_pos: Vec<(usize, usize)>,
    pub test_pos: Vec<(usize, usize)>,
    pub val_neg: Vec<(usize, usize)>,
    pub test_neg: Vec<(usize, usize)>,
}

const MIN_EDGES: usize = 10;

/// Shuffles the edges under `seed` and cuts them by `ratios`. Validation and
/// test sizes are `floor(ratio * |E|)`; the remainder trains. Each evaluation
/// split gets `neg_multiplier` times as many global uniform non-edges.
pub fn split_edges(
    g: &Graph,
    ratios: SplitRatios,
    neg_multiplier: usize,
    seed: u64,
) -> Result<EdgeSplit, GraphError> {
    let r = [ratios.train, ratios.val, ratios.test];
    if r.iter().any(|&x| !(0.0..=1.0).contains(&x)) || (r.iter().sum::<f64>() - 1.0).abs() > 1e-9
    {
        return Err(GraphError::InvalidRatios(r));
    }
    let m = g.num_edges();
    let take = |ratio: f64| (ratio * m as f64 + 1e-9).floor() as usize;
    let (n_val, n_test) = (take(ratios.val), take(ratios.test));
    if m < MIN_EDGES
        || (ratios.val > 0.0 && n_val == 0)
        || (ratios.test > 0.0 && n_test == 0)
        || n_val + n_test >= m
    {
        return Err(GraphError::TooFewEdges {
            edges: m,
            needed: MIN_EDGES,
        });
    }

    let mut edges: Vec<(usize, usize)> = g.edges().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0x5917]));
    edges.shuffle(&mut rng);
    let train_pos = edges.split_off(n_val + n_test);
    let test_pos = edges.split_off(n_val);
    let val_pos = edges;

    let negatives = negative_global_uniform(
        g,
        neg_multiplier * (n_val + n_test),
        derive_seed(seed, &[0x4e47]),
    )?;
    let (val_neg, test_neg) = negatives.split_at(neg_multiplier * n_val);
    Ok(EdgeSplit {
        train_pos,
        val_pos,
        test_pos,
        val_neg: val_neg.to_vec(),
        test_neg: test_neg.to_vec(),
    })
}
