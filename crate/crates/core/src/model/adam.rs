use super::params::ModelParams;
use super::ModelError;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Bias-corrected Adam update of one tensor at step `t` (1-based).
pub fn adam_step<T: Real>(params: &mut [T], grads: &[T], m: &mut [T], v: &mut [T], t: u64, cfg: &AdamConfig) {
    assert!(t >= 1);
    assert!(params.len() == grads.len() && m.len() == params.len() && v.len() == params.len());
    let b1 = T::of(cfg.beta1);
    let b2 = T::of(cfg.beta2);
    let one = T::one();
    let c1 = one - T::of(cfg.beta1.powi(t as i32));
    let c2 = one - T::of(cfg.beta2.powi(t as i32));
    let lr = T::of(cfg.lr);
    let eps = T::of(cfg.eps);
    for i in 0..params.len() {
        let g = grads[i];
        m[i] = b1 * m[i] + (one - b1) * g;
        v[i] = b2 * v[i] + (one - b2) * g * g;
        let m_hat = m[i] / c1;
        let v_hat = v[i] / c2;
        params[i] = params[i] - lr * m_hat / (v_hat.sqrt() + eps);
    }
}

/// Adam moments for a whole parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState<T> {
    pub config: AdamConfig,
    m: ModelParams<T>,
    v: ModelParams<T>,
    step: u64,
}

impl<T: Real> OptimizerState<T> {
    pub fn new(params: &ModelParams<T>, config: AdamConfig) -> Self {
        Self {
            config,
            m: params.zeros_like(),
            v: params.zeros_like(),
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn first_moment(&self) -> &ModelParams<T> {
        &self.m
    }

    pub fn second_moment(&self) -> &ModelParams<T> {
        &self.v
    }

    pub fn step(&mut self, params: &mut ModelParams<T>, grads: &ModelParams<T>) -> Result<(), ModelError> {
        params.check_same_shape(grads)?;
        params.check_same_shape(&self.m)?;
        self.step += 1;
        let t = self.step;
        let cfg = self.config;
        for (((p, g), m), v) in params
            .tensors_mut()
            .into_iter()
            .zip(grads.tensors())
            .zip(self.m.tensors_mut())
            .zip(self.v.tensors_mut())
        {
            adam_step(p, g, m, v, t, &cfg);
        }
        Ok(())
    }
}
