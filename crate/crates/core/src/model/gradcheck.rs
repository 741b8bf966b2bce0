//! Central finite-difference check of [`loss_and_gradients`].

use ndarray::Array2;

use super::{loss_and_gradients, relu_pattern, ModelError, ModelParams};
use crate::sampler::ComputationGraph;

#[derive(Debug, Clone, PartialEq)]
pub struct GradientCheck {
    /// Parameters compared.
    pub checked: usize,
    /// Probes skipped because a ReLU changed sign between `θ ± h`.
    pub skipped: usize,
    pub worst_relative_error: f64,
    /// Flat index of the worst parameter.
    pub worst_index: Option<usize>,
}

/// Compares every `stride`-th analytic gradient against
/// `(L(θ + h) − L(θ − h)) / 2h`. Relative error is taken against the larger
/// magnitude, floored at `1e-6`.
pub fn gradient_check(
    cg: &ComputationGraph,
    features: &Array2<f32>,
    params: &ModelParams<f64>,
    pairs: &[(usize, usize)],
    labels: &[f64],
    h: f64,
    stride: usize,
) -> Result<GradientCheck, ModelError> {
    let (_, grads) = loss_and_gradients(cg, features, params, pairs, labels)?;
    let base = relu_pattern(cg, features, params, pairs)?;
    let mut check = GradientCheck {
        checked: 0,
        skipped: 0,
        worst_relative_error: 0.0,
        worst_index: None,
    };
    for i in (0..params.num_params()).step_by(stride.max(1)) {
        let mut plus = params.clone();
        plus.set_flat(i, params.get_flat(i) + h);
        let mut minus = params.clone();
        minus.set_flat(i, params.get_flat(i) - h);
        if relu_pattern(cg, features, &plus, pairs)? != base
            || relu_pattern(cg, features, &minus, pairs)? != base
        {
            check.skipped += 1;
            continue;
        }
        let lp = loss_and_gradients(cg, features, &plus, pairs, labels)?.0;
        let lm = loss_and_gradients(cg, features, &minus, pairs, labels)?.0;
        let fd = (lp - lm) / (2.0 * h);
        let an = grads.get_flat(i);
        let err = (fd - an).abs() / fd.abs().max(an.abs()).max(1e-6);
        if check.worst_index.is_none() || err > check.worst_relative_error {
            check.worst_relative_error = err;
            check.worst_index = Some(i);
        }
        check.checked += 1;
    }
    Ok(check)
}
