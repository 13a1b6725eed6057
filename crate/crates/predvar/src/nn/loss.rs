//! Loss heads, all computed from pre-head logits in numerically stable form:
//! squared error (regression), sigmoid cross-entropy (binary), and softmax
//! cross-entropy on temperature-scaled logits (multi-class).

use crate::data::{Label, TaskKind};
use crate::error::{Error, Result};
use crate::scalar::{c, Scalar};

use super::{sigmoid, ModelSpec};

/// Loss of one example given the model's logits.
pub fn loss<T: Scalar>(spec: &ModelSpec<T>, logits: &[T], label: &Label<T>) -> Result<T> {
    loss_and_dlogits(spec, logits, label).map(|(l, _)| l)
}

/// Loss and its gradient with respect to the logits.
pub fn loss_and_dlogits<T: Scalar>(
    spec: &ModelSpec<T>,
    logits: &[T],
    label: &Label<T>,
) -> Result<(T, Vec<T>)> {
    match spec.task {
        TaskKind::Regression => {
            let y = value_label(label)?;
            let raw = logits[0];
            let (pred, clamped) = match spec.output_clamp {
                Some((lo, hi)) => {
                    let p = raw.max(lo).min(hi);
                    (p, p != raw)
                }
                None => (raw, false),
            };
            let diff = pred - y;
            let grad = if clamped { T::zero() } else { c::<T>(2.0) * diff };
            Ok((diff * diff, vec![grad]))
        }
        TaskKind::Binary => {
            let y = value_label(label)?;
            if y != T::zero() && y != T::one() {
                return Err(Error::Input(format!("binary label must be 0 or 1, got {y}")));
            }
            let z = logits[0];
            // max(z,0) - z*y + ln(1 + exp(-|z|))
            let l = z.max(T::zero()) - z * y + (T::one() + (-z.abs()).exp()).ln();
            Ok((l, vec![sigmoid(z) - y]))
        }
        TaskKind::Multiclass(classes) => {
            let k = match label {
                Label::Class(k) => *k,
                Label::Value(_) => {
                    return Err(Error::Input("multiclass task expects a class label".to_owned()))
                }
            };
            if k >= classes {
                return Err(Error::Input(format!(
                    "class index {k} out of range for {classes} classes"
                )));
            }
            let temp = spec.temperature;
            let scaled: Vec<T> = logits.iter().map(|&z| z / temp).collect();
            let m = scaled.iter().cloned().fold(T::neg_infinity(), T::max);
            let sum_exp: T = scaled.iter().map(|&s| (s - m).exp()).sum();
            let lse = m + sum_exp.ln();
            let l = lse - scaled[k];
            let grads: Vec<T> = scaled
                .iter()
                .enumerate()
                .map(|(i, &s)| {
                    let p = (s - lse).exp();
                    let indicator = if i == k { T::one() } else { T::zero() };
                    (p - indicator) / temp
                })
                .collect();
            Ok((l, grads))
        }
    }
}

fn value_label<T: Scalar>(label: &Label<T>) -> Result<T> {
    match label {
        Label::Value(v) if v.is_finite() => Ok(*v),
        Label::Value(v) => Err(Error::Input(format!("non-finite label {v}"))),
        Label::Class(_) => Err(Error::Input("value task expects a value label".to_owned())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec_for(task: TaskKind, temperature: f64) -> ModelSpec<f64> {
        ModelSpec {
            task,
            embeddings: vec![],
            numeric_inputs: 1,
            hidden_sizes: vec![1],
            temperature,
            dropout_rate: 0.0,
            output_clamp: None,
        }
    }

    #[test]
    fn regression_exact_hit_is_zero() {
        let spec = spec_for(TaskKind::Regression, 1.0);
        let l = loss(&spec, &[3.0], &Label::Value(3.0)).unwrap();
        assert_eq!(l, 0.0);
    }

    #[test]
    fn binary_logit_zero_is_ln2() {
        let spec = spec_for(TaskKind::Binary, 1.0);
        let l = loss(&spec, &[0.0], &Label::Value(1.0)).unwrap();
        assert_relative_eq!(l, std::f64::consts::LN_2, epsilon = 1e-12);
    }

    #[test]
    fn multiclass_uniform_logits_is_ln2() {
        let spec = spec_for(TaskKind::Multiclass(2), 1.0);
        let l = loss(&spec, &[0.0, 0.0], &Label::Class(0)).unwrap();
        assert_relative_eq!(l, std::f64::consts::LN_2, epsilon = 1e-12);
    }

    #[test]
    fn binary_extreme_logits_stay_finite() {
        let spec = spec_for(TaskKind::Binary, 1.0);
        for z in [-1e4, -50.0, 50.0, 1e4] {
            let l = loss(&spec, &[z], &Label::Value(0.0)).unwrap();
            assert!(l.is_finite(), "loss at z={z} is {l}");
        }
    }

    #[test]
    fn multiclass_gradient_sums_to_zero() {
        let spec = spec_for(TaskKind::Multiclass(3), 0.5);
        let (_, g) = loss_and_dlogits(&spec, &[1.0, -2.0, 0.3], &Label::Class(1)).unwrap();
        let total: f64 = g.iter().sum();
        assert_relative_eq!(total, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn out_of_range_labels_rejected() {
        let spec = spec_for(TaskKind::Multiclass(3), 1.0);
        assert!(loss(&spec, &[0.0; 3], &Label::Class(3)).is_err());
        let spec = spec_for(TaskKind::Binary, 1.0);
        assert!(loss(&spec, &[0.0], &Label::Value(0.5)).is_err());
    }

    #[test]
    fn clamped_region_has_zero_gradient() {
        let mut spec = spec_for(TaskKind::Regression, 1.0);
        spec.output_clamp = Some((0.0, 1.0));
        let (_, g) = loss_and_dlogits(&spec, &[2.5], &Label::Value(0.2)).unwrap();
        assert_eq!(g[0], 0.0);
        let (_, g) = loss_and_dlogits(&spec, &[0.5], &Label::Value(0.2)).unwrap();
        assert!(g[0] != 0.0);
    }
}
