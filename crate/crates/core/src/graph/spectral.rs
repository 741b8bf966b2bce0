//! Dense Laplacian oracles. Only for small graphs in tests and `verify`.

use nalgebra::{DMatrix, SymmetricEigen};

use super::{Graph, GraphError};

/// Largest graph the dense eigensolver oracles accept.
pub const MAX_DENSE_NODES: usize = 2000;

/// Dense weighted Laplacian `L = D − A`.
pub fn laplacian_dense(g: &Graph) -> DMatrix<f64> {
    let n = g.num_nodes();
    let mut l = DMatrix::zeros(n, n);
    for (u, v, w) in g.weighted_edges() {
        l[(u, v)] -= w;
        l[(v, u)] -= w;
        l[(u, u)] += w;
        l[(v, v)] += w;
    }
    l
}

/// Second-smallest eigenvalue of `D^{-1/2} L D^{-1/2}`.
pub fn normalized_laplacian_gamma(g: &Graph) -> Result<f64, GraphError> {
    let n = g.num_nodes();
    if n > MAX_DENSE_NODES {
        return Err(GraphError::TooLarge {
            n,
            max: MAX_DENSE_NODES,
        });
    }
    if n < 2 || !g.is_connected() {
        return Err(GraphError::Disconnected);
    }
    let mut l = laplacian_dense(g);
    let inv_sqrt: Vec<f64> = (0..n).map(|u| 1.0 / l[(u, u)].sqrt()).collect();
    for i in 0..n {
        for j in 0..n {
            l[(i, j)] *= inv_sqrt[i] * inv_sqrt[j];
        }
    }
    let mut eig = SymmetricEigen::new(l).eigenvalues.as_slice().to_vec();
    eig.sort_by(f64::total_cmp);
    Ok(eig[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::plain;

    #[test]
    fn gamma_examples() {
        let p2 = plain(2, &[(0, 1)]);
        assert!((normalized_laplacian_gamma(&p2).unwrap() - 2.0).abs() < 1e-12);
        let k3 = plain(3, &[(0, 1), (1, 2), (0, 2)]);
        assert!((normalized_laplacian_gamma(&k3).unwrap() - 1.5).abs() < 1e-12);
        let p3 = plain(3, &[(0, 1), (1, 2)]);
        assert!((normalized_laplacian_gamma(&p3).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disconnected_is_signalled() {
        let g = plain(4, &[(0, 1), (2, 3)]);
        assert!(matches!(
            normalized_laplacian_gamma(&g),
            Err(GraphError::Disconnected)
        ));
    }

    #[test]
    fn dense_laplacian_rows_sum_to_zero() {
        let g = plain(4, &[(0, 1), (1, 2), (2, 3), (0, 2)]);
        let l = laplacian_dense(&g);
        for i in 0..4 {
            assert_eq!(l.row(i).sum(), 0.0);
        }
        assert_eq!(l[(2, 2)], 3.0);
    }
}
