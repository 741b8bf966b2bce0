use std::collections::{BTreeMap, HashSet};
use std::io::Write;

use super::config::SharingMode;
use crate::graph::FEATURE_BYTES;
use crate::sampler::ComputationGraph;

/// Bytes for one sampled edge fetched from the shared store: two 4-byte ids.
pub const EDGE_BYTES: u64 = 8;
/// Bytes for one stored sparsifier weight.
pub const WEIGHT_BYTES: u64 = 4;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Bytes {
    pub feature: u64,
    pub structure: u64,
}

impl Bytes {
    pub fn total(&self) -> u64 {
        self.feature + self.structure
    }

    fn add(&mut self, other: Bytes) {
        self.feature += other.feature;
        self.structure += other.structure;
    }
}

/// Byte counts of master-to-worker transfers.
///
/// Per-epoch counters are kept per `(epoch, worker)`. A node's features are
/// billed at most once per `(worker, batch)`. Setup transfers (halo
/// features, shared-store distribution) are tracked separately.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommLedger {
    feature_dim: usize,
    epochs: BTreeMap<(usize, usize), Bytes>,
    setup: BTreeMap<usize, Bytes>,
    open_batch: BTreeMap<usize, ((usize, usize), HashSet<u32>)>,
}

impl CommLedger {
    pub fn new(feature_dim: usize) -> Self {
        Self {
            feature_dim,
            epochs: BTreeMap::new(),
            setup: BTreeMap::new(),
            open_batch: BTreeMap::new(),
        }
    }

    /// Dedup scope of feature billing.
    pub fn dedup_scope(&self) -> &'static str {
        "worker-batch"
    }

    pub fn bytes_per_node(&self) -> u64 {
        FEATURE_BYTES * self.feature_dim as u64
    }

    /// Bills `cg`'s remote traffic to `(epoch, worker)`: features of every
    /// uncached node not yet billed in this batch, plus [`EDGE_BYTES`] per
    /// sampled edge that came from the shared store. Nothing is billed
    /// without a shared store. Returns the bytes added.
    pub fn account_transfer(
        &mut self,
        cg: &ComputationGraph,
        epoch: usize,
        worker: usize,
        batch: usize,
        sharing: SharingMode,
    ) -> Bytes {
        if sharing == SharingMode::None {
            return Bytes::default();
        }
        let (key, seen) = self
            .open_batch
            .entry(worker)
            .or_insert_with(|| ((epoch, batch), HashSet::new()));
        if *key != (epoch, batch) {
            *key = (epoch, batch);
            seen.clear();
        }
        let fresh = cg.remote_nodes().iter().filter(|&&v| seen.insert(v)).count() as u64;
        let bill = Bytes {
            feature: fresh * FEATURE_BYTES * self.feature_dim as u64,
            structure: cg.remote_edges() as u64 * EDGE_BYTES,
        };
        if bill != Bytes::default() {
            self.epochs.entry((epoch, worker)).or_default().add(bill);
        }
        bill
    }

    pub fn add_setup(&mut self, worker: usize, bytes: Bytes) {
        self.setup.entry(worker).or_default().add(bytes);
    }

    pub fn epoch_worker(&self, epoch: usize, worker: usize) -> Bytes {
        self.epochs.get(&(epoch, worker)).copied().unwrap_or_default()
    }

    /// All workers' bytes for one epoch.
    pub fn epoch_total(&self, epoch: usize) -> Bytes {
        let mut b = Bytes::default();
        for (_, v) in self.epochs.range((epoch, 0)..(epoch + 1, 0)) {
            b.add(*v);
        }
        b
    }

    /// All per-epoch bytes up to and including `epoch`.
    pub fn cumulative(&self, epoch: usize) -> Bytes {
        let mut b = Bytes::default();
        for (_, v) in self.epochs.range(..(epoch + 1, 0)) {
            b.add(*v);
        }
        b
    }

    pub fn setup_total(&self) -> Bytes {
        let mut b = Bytes::default();
        self.setup.values().for_each(|v| b.add(*v));
        b
    }

    /// `kind,epoch,worker,feature_bytes,structure_bytes`; setup rows have an
    /// empty epoch.
    pub fn write_csv(&self, mut out: impl Write, num_epochs: usize, num_workers: usize) -> std::io::Result<()> {
        writeln!(out, "kind,epoch,worker,feature_bytes,structure_bytes")?;
        for w in 0..num_workers {
            let b = self.setup.get(&w).copied().unwrap_or_default();
            writeln!(out, "setup,,{w},{},{}", b.feature, b.structure)?;
        }
        for e in 0..num_epochs {
            for w in 0..num_workers {
                let b = self.epoch_worker(e, w);
                writeln!(out, "epoch,{e},{w},{},{}", b.feature, b.structure)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::sampler::{build_computation_graph, GraphView, RemoteSource};
    use ndarray::Array2;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Path 0-1-2-3 where worker 0 owns {0} and caches {0, 1}. Node 2 is
    /// sampled at hop 2 (from 1) and again at hop 3 (from 1 once more).
    fn remote_cg(sharing: SharingMode) -> ComputationGraph {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)], Array2::zeros((4, 128))).unwrap();
        let owner = [0u32, 1, 1, 1];
        let cached = [true, true, false, false];
        let remote = match sharing {
            SharingMode::None => RemoteSource::None,
            _ => RemoteSource::Complete(g.csr()),
        };
        let view = GraphView::new(0, &owner, g.csr(), &cached, remote);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        build_computation_graph(&[0], &view, &[5, 5, 5], &mut rng).unwrap()
    }

    #[test]
    fn revisited_node_billed_once() {
        let cg = remote_cg(SharingMode::Complete);
        assert_eq!(cg.remote_nodes(), &[2, 3]);
        let mut ledger = CommLedger::new(128);
        let b = ledger.account_transfer(&cg, 0, 0, 0, SharingMode::Complete);
        assert_eq!(b.feature, 2 * 512);
        let again = ledger.account_transfer(&cg, 0, 0, 0, SharingMode::Complete);
        assert_eq!(again.feature, 0);
        let next = ledger.account_transfer(&cg, 0, 0, 1, SharingMode::Complete);
        assert_eq!(next.feature, 2 * 512);
        assert_eq!(ledger.epoch_total(0).feature, 4 * 512);
    }

    #[test]
    fn no_sharing_bills_nothing() {
        let cg = remote_cg(SharingMode::None);
        let mut ledger = CommLedger::new(128);
        let before = ledger.clone();
        assert_eq!(ledger.account_transfer(&cg, 0, 0, 0, SharingMode::None), Bytes::default());
        assert_eq!(ledger, before);
    }

    #[test]
    fn csv_layout() {
        let mut ledger = CommLedger::new(2);
        ledger.add_setup(1, Bytes { feature: 8, structure: 16 });
        let mut out = Vec::new();
        ledger.write_csv(&mut out, 1, 2).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(
            text,
            "kind,epoch,worker,feature_bytes,structure_bytes\nsetup,,0,0,0\nsetup,,1,8,16\nepoch,0,0,0,0\nepoch,0,1,0,0\n"
        );
    }
}
