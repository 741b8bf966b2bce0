use crate::model::{ModelError, ModelParams};
use crate::scalar::Real;

/// Elementwise mean, accumulated in slice order.
fn mean<T: Real>(sets: &[ModelParams<T>]) -> Result<ModelParams<T>, ModelError> {
    let (first, rest) = sets.split_first().ok_or(ModelError::EmptyBatch)?;
    let mut acc = first.clone();
    for s in rest {
        acc.add_assign(s)?;
    }
    if sets.len() > 1 {
        acc.scale(T::one() / T::of_usize(sets.len()));
    }
    Ok(acc)
}

/// `(1/p) Σ ∇ᵢ` over the workers' gradients.
pub fn sync_gradients<T: Real>(worker_grads: &[ModelParams<T>]) -> Result<ModelParams<T>, ModelError> {
    mean(worker_grads)
}

/// Average of the workers' parameter replicas.
pub fn sync_models<T: Real>(worker_params: &[ModelParams<T>]) -> Result<ModelParams<T>, ModelError> {
    mean(worker_params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Architecture, ModelConfig, PredictorKind};

    fn params(seed: u64) -> ModelParams<f64> {
        let cfg = ModelConfig {
            architecture: Architecture::Gcn,
            predictor: PredictorKind::Mlp,
            input_dim: 3,
            hidden_dim: 4,
            num_layers: 2,
        };
        ModelParams::init(&cfg, seed)
    }

    #[test]
    fn opposite_gradients_cancel() {
        let g = params(1);
        let mut neg = g.clone();
        neg.scale(-1.0);
        let avg = sync_gradients(&[g, neg]).unwrap();
        assert!(avg.to_flat().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn single_worker_is_identity() {
        let g = params(2);
        assert_eq!(sync_gradients(std::slice::from_ref(&g)).unwrap(), g);
    }

    #[test]
    fn midpoint_of_two_replicas() {
        let theta = params(3);
        let delta = params(4);
        let mut far = delta.clone();
        far.scale(2.0);
        far.add_assign(&theta).unwrap();
        let mid = sync_models(&[theta.clone(), far]).unwrap();
        let mut expect = theta;
        expect.add_assign(&delta).unwrap();
        for (a, b) in mid.to_flat().iter().zip(expect.to_flat()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn identical_replicas_unchanged() {
        let p = params(5);
        let avg = sync_models(&[p.clone(), p.clone(), p.clone()]).unwrap();
        for (a, b) in avg.to_flat().iter().zip(p.to_flat()) {
            assert!((a - b).abs() <= 4.0 * f64::EPSILON * b.abs().max(1.0));
        }
    }

    #[test]
    fn shape_mismatch_and_empty() {
        let cfg = ModelConfig {
            architecture: Architecture::Gcn,
            predictor: PredictorKind::Dot,
            input_dim: 3,
            hidden_dim: 4,
            num_layers: 2,
        };
        let other = ModelParams::init(&cfg, 0);
        assert!(sync_models(&[params(1), other]).is_err());
        assert!(sync_gradients::<f64>(&[]).is_err());
    }
}
