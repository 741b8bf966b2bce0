//! Exact effective resistance via the Laplacian pseudo-inverse, and the
//! degree-based bounds it must satisfy. Dense; small graphs only.

use nalgebra::{DMatrix, SymmetricEigen};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{importance_sample, SparsifyError, MAX_ORACLE_NODES};
use crate::seed::derive_seed;
use crate::graph::{laplacian_dense, normalized_laplacian_gamma, Graph};

/// Pseudo-inverse of a connected graph's Laplacian.
pub struct ResistanceOracle {
    pinv: DMatrix<f64>,
}

impl ResistanceOracle {
    pub fn new(g: &Graph) -> Result<Self, SparsifyError> {
        let n = g.num_nodes();
        if n > MAX_ORACLE_NODES {
            return Err(SparsifyError::TooLarge {
                n,
                max: MAX_ORACLE_NODES,
            });
        }
        if n < 2 || !g.is_connected() {
            return Err(SparsifyError::Disconnected);
        }
        let eig = SymmetricEigen::new(laplacian_dense(g));
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        // a connected graph has exactly one zero eigenvalue, the constant vector
        let mut pinv = DMatrix::zeros(n, n);
        for &i in &order[1..] {
            let v = eig.eigenvectors.column(i);
            pinv += (v * v.transpose()) / eig.eigenvalues[i];
        }
        Ok(Self { pinv })
    }

    /// `(e_u − e_v)ᵀ L⁺ (e_u − e_v)`.
    pub fn resistance(&self, u: usize, v: usize) -> f64 {
        let p = &self.pinv;
        p[(u, u)] + p[(v, v)] - p[(u, v)] - p[(v, u)]
    }

    pub fn pseudo_inverse(&self) -> &DMatrix<f64> {
        &self.pinv
    }
}

/// Effective resistance between `u` and `v` in a connected graph.
pub fn exact_effective_resistance(g: &Graph, u: usize, v: usize) -> Result<f64, SparsifyError> {
    Ok(ResistanceOracle::new(g)?.resistance(u, v))
}

/// Result of checking `½(1/d_u + 1/d_v) ≤ r_uv ≤ (1/γ)(1/d_u + 1/d_v)` on
/// every edge.
#[derive(Debug, Clone)]
pub struct BoundsCheck {
    pub gamma: f64,
    pub edges_checked: usize,
    /// Smallest `r − lower` over all edges.
    pub min_lower_slack: f64,
    /// Smallest `upper − r` over all edges.
    pub min_upper_slack: f64,
    /// Edges whose upper bound is attained within the tolerance.
    pub tight_upper: usize,
    /// `(u, v, r, lower, upper)` for every violated edge.
    pub violations: Vec<(usize, usize, f64, f64, f64)>,
}

impl BoundsCheck {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Absolute tolerance for the bound comparison.
pub const BOUNDS_TOLERANCE: f64 = 1e-9;

/// Checks the degree bounds on effective resistance for every edge of `g`.
pub fn resistance_bounds_hold(g: &Graph) -> Result<BoundsCheck, SparsifyError> {
    let oracle = ResistanceOracle::new(g)?;
    let gamma = normalized_laplacian_gamma(g)?;
    let mut check = BoundsCheck {
        gamma,
        edges_checked: 0,
        min_lower_slack: f64::INFINITY,
        min_upper_slack: f64::INFINITY,
        tight_upper: 0,
        violations: Vec::new(),
    };
    for (u, v) in g.edges() {
        let s = 1.0 / g.degree(u) as f64 + 1.0 / g.degree(v) as f64;
        let (lower, upper) = (0.5 * s, s / gamma);
        let r = oracle.resistance(u, v);
        check.edges_checked += 1;
        check.min_lower_slack = check.min_lower_slack.min(r - lower);
        check.min_upper_slack = check.min_upper_slack.min(upper - r);
        if (upper - r).abs() <= BOUNDS_TOLERANCE {
            check.tight_upper += 1;
        }
        if r < lower - BOUNDS_TOLERANCE || r > upper + BOUNDS_TOLERANCE {
            check.violations.push((u, v, r, lower, upper));
        }
    }
    Ok(check)
}

/// Outcome of comparing `xᵀL̃x` against `xᵀLx` over random unit vectors.
#[derive(Debug, Clone)]
pub struct ClosenessCheck {
    pub samples: usize,
    pub vectors: usize,
    /// Vectors with `|xᵀL̃x − xᵀLx| ≤ ε·xᵀLx`.
    pub within: usize,
    pub worst_relative_error: f64,
}

impl ClosenessCheck {
    pub fn fraction_within(&self) -> f64 {
        self.within as f64 / self.vectors as f64
    }
}

/// Samples `samples` edges with replacement, edge `e` with probability
/// `r_e / Σ r`, each draw adding `1 / (samples · p_e)`, then measures how
/// well the weighted Laplacian preserves the quadratic form on `vectors`
/// Gaussian directions normalized to unit length.
pub fn spectral_closeness(
    g: &Graph,
    samples: usize,
    vectors: usize,
    epsilon: f64,
    seed: u64,
) -> Result<ClosenessCheck, SparsifyError> {
    let oracle = ResistanceOracle::new(g)?;
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let r: Vec<f64> = edges.iter().map(|&(u, v)| oracle.resistance(u, v)).collect();
    let total: f64 = r.iter().sum();
    let probs: Vec<f64> = r.iter().map(|x| x / total).collect();
    let sample = importance_sample(&probs, samples, derive_seed(seed, &[0x5c]))?;
    let sparse = Graph::from_weighted_edges(
        g.num_nodes(),
        &sample
            .index
            .iter()
            .zip(&sample.weights)
            .map(|(&e, &w)| (edges[e].0, edges[e].1, w))
            .collect::<Vec<_>>(),
        ndarray::Array2::zeros((g.num_nodes(), 0)),
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0x7e]));
    let mut check = ClosenessCheck {
        samples,
        vectors,
        within: 0,
        worst_relative_error: 0.0,
    };
    for _ in 0..vectors {
        let mut x: Vec<f64> = (0..g.num_nodes()).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= norm);
        let exact: f64 = g.laplacian_quadratic_form(&x)?;
        let approx: f64 = sparse.laplacian_quadratic_form(&x)?;
        let rel = (approx - exact).abs() / exact;
        check.worst_relative_error = check.worst_relative_error.max(rel);
        if rel <= epsilon {
            check.within += 1;
        }
    }
    Ok(check)
}
