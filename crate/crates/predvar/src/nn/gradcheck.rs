//! Gradient verification against central finite differences.

use crate::data::Example;
use crate::error::Result;
use crate::scalar::{c, Scalar};

use super::{backward, forward_trace, loss, ModelParams, ModelSpec};

/// Denominator floor for the relative error so near-zero gradients do not
/// blow up the ratio.
const REL_FLOOR: f64 = 1e-4;

/// Maximum relative error between the analytic gradient and a central
/// finite-difference estimate, over every parameter.
pub fn grad_check<T: Scalar>(
    spec: &ModelSpec<T>,
    params: &ModelParams<T>,
    example: &Example<T>,
    epsilon: f64,
) -> Result<T> {
    let mut grads = ModelParams::zeros(spec);
    backward(spec, params, example, None, &mut grads)?;
    grad_check_against(spec, params, example, epsilon, &grads)
}

/// Same comparison but against caller-provided "analytic" gradients; lets
/// tests verify that a corrupted gradient is detected.
pub fn grad_check_against<T: Scalar>(
    spec: &ModelSpec<T>,
    params: &ModelParams<T>,
    example: &Example<T>,
    epsilon: f64,
    analytic: &ModelParams<T>,
) -> Result<T> {
    let eps = c::<T>(epsilon);
    let mut probe = params.clone();
    let mut max_rel = T::zero();
    for i in 0..probe.values.len() {
        let orig = probe.values[i];
        probe.values[i] = orig + eps;
        let plus = example_loss(spec, &probe, example)?;
        probe.values[i] = orig - eps;
        let minus = example_loss(spec, &probe, example)?;
        probe.values[i] = orig;

        let numeric = (plus - minus) / (c::<T>(2.0) * eps);
        let a = analytic.values[i];
        let denom = a.abs().max(numeric.abs()).max(c(REL_FLOOR));
        let rel = (a - numeric).abs() / denom;
        if rel > max_rel {
            max_rel = rel;
        }
    }
    Ok(max_rel)
}

fn example_loss<T: Scalar>(
    spec: &ModelSpec<T>,
    params: &ModelParams<T>,
    example: &Example<T>,
) -> Result<T> {
    let trace = forward_trace(spec, params, example, None)?;
    loss::loss(spec, &trace.logits, &example.label)
}

/// Smallest |pre-activation| over all hidden neurons for this example.
///
/// Central differences are one-sided at a ReLU kink, so a gradient check is
/// only meaningful when this distance comfortably exceeds the probe epsilon.
pub fn min_kink_distance<T: Scalar>(
    spec: &ModelSpec<T>,
    params: &ModelParams<T>,
    example: &Example<T>,
) -> Result<T> {
    let trace = forward_trace(spec, params, example, None)?;
    Ok(trace
        .pre
        .iter()
        .flatten()
        .map(|z| z.abs())
        .fold(T::infinity(), T::min))
}
