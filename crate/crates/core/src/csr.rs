//! Compressed sparse row adjacency.
//!
//! [`Csr`] is the raw row store used by [`crate::Graph`] and by the resolved
//! views the sampler walks. It makes no symmetry promise of its own.

/// Row-compressed adjacency with optional per-entry weights.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Csr {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Option<Vec<f64>>,
}

impl Csr {
    /// Builds from per-row lists. Rows keep the order they were given in.
    pub fn from_rows<I>(rows: I, weighted: bool) -> Self
    where
        I: IntoIterator,
        I::Item: IntoIterator<Item = (u32, f64)>,
    {
        let mut offsets = vec![0];
        let mut targets = Vec::new();
        let mut weights = Vec::new();
        for row in rows {
            for (t, w) in row {
                targets.push(t);
                if weighted {
                    weights.push(w);
                }
            }
            offsets.push(targets.len());
        }
        Self {
            offsets,
            targets,
            weights: weighted.then_some(weights),
        }
    }

    #[inline]
    pub fn num_rows(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn num_entries(&self) -> usize {
        self.targets.len()
    }

    #[inline]
    pub fn row(&self, u: usize) -> &[u32] {
        &self.targets[self.offsets[u]..self.offsets[u + 1]]
    }

    /// Weights of row `u`, or `None` when the store is unweighted (all 1).
    #[inline]
    pub fn row_weights(&self, u: usize) -> Option<&[f64]> {
        self.weights
            .as_ref()
            .map(|w| &w[self.offsets[u]..self.offsets[u + 1]])
    }

    #[inline]
    pub fn row_len(&self, u: usize) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn targets(&self) -> &[u32] {
        &self.targets
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn is_weighted(&self) -> bool {
        self.weights.is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_and_weights() {
        let csr = Csr::from_rows(vec![vec![(1, 0.5), (2, 2.0)], vec![], vec![(0, 1.0)]], true);
        assert_eq!(csr.num_rows(), 3);
        assert_eq!(csr.row(0), &[1, 2]);
        assert_eq!(csr.row_weights(0), Some(&[0.5, 2.0][..]));
        assert!(csr.row(1).is_empty());
        assert_eq!(csr.offsets(), &[0, 2, 2, 3]);
    }

    #[test]
    fn unweighted_rows_have_no_weights() {
        let csr = Csr::from_rows(vec![vec![(1, 9.0)], vec![(0, 9.0)]], false);
        assert_eq!(csr.row_weights(1), None);
        assert_eq!(csr.num_entries(), 2);
    }
}
