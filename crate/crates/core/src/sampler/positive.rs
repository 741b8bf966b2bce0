use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::SampleError;
use crate::partition::PartitionPlan;
use crate::seed::derive_seed;

/// Training edges a worker is responsible for: those whose lower-id endpoint
/// it owns. With `internal_only`, the other endpoint must be owned too.
pub fn owned_train_edges(
    train_pos: &[(usize, usize)],
    plan: &PartitionPlan,
    worker: usize,
    internal_only: bool,
) -> Vec<(usize, usize)> {
    train_pos
        .iter()
        .copied()
        .filter(|&(u, v)| {
            let (lo, hi) = (u.min(v), u.max(v));
            plan.part_of(lo) == worker && (!internal_only || plan.part_of(hi) == worker)
        })
        .collect()
}

/// A worker's positive edges, visited once per epoch in a seeded order.
#[derive(Debug, Clone)]
pub struct PositiveSampler {
    worker: usize,
    edges: Vec<(usize, usize)>,
}

impl PositiveSampler {
    pub fn new(worker: usize, edges: Vec<(usize, usize)>) -> Result<Self, SampleError> {
        if edges.is_empty() {
            return Err(SampleError::NoTrainEdges { worker });
        }
        Ok(Self { worker, edges })
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// The epoch's permutation, determined by `(seed, epoch, worker)`.
    pub fn epoch(&self, seed: u64, epoch: usize) -> EpochPositives<'_> {
        let mut order: Vec<usize> = (0..self.edges.len()).collect();
        let s = derive_seed(seed, &[0x9051, epoch as u64, self.worker as u64]);
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(s));
        EpochPositives {
            edges: &self.edges,
            order,
        }
    }
}

/// One epoch's ordering of a worker's positive edges.
#[derive(Debug, Clone)]
pub struct EpochPositives<'a> {
    edges: &'a [(usize, usize)],
    order: Vec<usize>,
}

impl EpochPositives<'_> {
    /// Batches needed to visit every edge with `batch_size / 2` per batch.
    pub fn num_batches(&self, batch_size: usize) -> usize {
        self.order.len().div_ceil(positives_per_batch(batch_size))
    }

    /// Positive pairs of batch `batch_index`; empty past the end of the epoch.
    pub fn batch(&self, batch_index: usize, batch_size: usize) -> Vec<(usize, usize)> {
        let per = positives_per_batch(batch_size);
        let start = (batch_index * per).min(self.order.len());
        let end = (start + per).min(self.order.len());
        self.order[start..end].iter().map(|&i| self.edges[i]).collect()
    }
}

fn positives_per_batch(batch_size: usize) -> usize {
    (batch_size / 2).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::Strategy;

    fn edges(n: usize) -> Vec<(usize, usize)> {
        (0..n).map(|i| (i, i + 1)).collect()
    }

    #[test]
    fn small_worker_fits_in_one_batch() {
        let s = PositiveSampler::new(0, edges(5)).unwrap();
        let e = s.epoch(1, 0);
        assert_eq!(e.num_batches(10), 1);
        let mut b = e.batch(0, 10);
        b.sort_unstable();
        assert_eq!(b, edges(5));
        assert!(e.batch(1, 10).is_empty());
    }

    #[test]
    fn epochs_reorder_same_multiset() {
        let s = PositiveSampler::new(3, edges(40)).unwrap();
        let (a, b) = (s.epoch(7, 0), s.epoch(7, 1));
        let collect = |e: &EpochPositives| -> Vec<_> {
            (0..e.num_batches(8)).flat_map(|i| e.batch(i, 8)).collect()
        };
        let (xa, xb) = (collect(&a), collect(&b));
        assert_ne!(xa, xb);
        let (mut sa, mut sb) = (xa.clone(), xb.clone());
        sa.sort_unstable();
        sb.sort_unstable();
        assert_eq!(sa, sb);
        assert_eq!(sa, edges(40));
        assert_eq!(collect(&s.epoch(7, 0)), xa);
    }

    #[test]
    fn ownership_by_lower_endpoint() {
        let plan = PartitionPlan::new(2, vec![0, 1, 0, 1], Strategy::GreedyCut);
        let train = vec![(0, 1), (1, 2), (2, 3), (3, 1), (0, 2)];
        assert_eq!(owned_train_edges(&train, &plan, 0, false), vec![(0, 1), (2, 3), (0, 2)]);
        assert_eq!(owned_train_edges(&train, &plan, 1, false), vec![(1, 2), (3, 1)]);
        assert_eq!(owned_train_edges(&train, &plan, 0, true), vec![(0, 2)]);
        let all = PartitionPlan::single(4);
        assert_eq!(owned_train_edges(&train, &all, 0, false), train);
    }

    #[test]
    fn empty_worker_is_signalled() {
        assert_eq!(
            PositiveSampler::new(2, vec![]).unwrap_err(),
            SampleError::NoTrainEdges { worker: 2 }
        );
    }
}
