//! Mini-batch Adam training with deterministic ordering and early stopping.
//!
//! Training is a pure function of `(spec, config, data order, seeds)`: batch
//! sums run in fixed example order, every random draw comes from a keyed
//! stream, and the held-out validation slice is the trailing fraction of the
//! given rows. Repeated runs produce bitwise-identical parameters.

use crate::data::{epoch_order, Dataset, Example, TaskKind};
use crate::error::{Error, Result};
use crate::scalar::{c, Scalar};

use super::{backward_with_trace, forward_trace, init_params, loss, ModelParams, ModelSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EarlyStopping {
    /// Number of consecutive non-improving epochs tolerated before stopping.
    pub patience: usize,
    /// Trailing fraction of the training rows held out for validation.
    pub validation_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Optimizer {
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub max_epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub early_stopping: EarlyStopping,
    pub optimizer: Optimizer,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_epochs == 0 {
            return Err(Error::Config("max_epochs must be positive".to_owned()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".to_owned()));
        }
        #[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config("learning_rate must be positive".to_owned()));
        }
        let vf = self.early_stopping.validation_fraction;
        #[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
        if !(vf > 0.0 && vf < 1.0) {
            return Err(Error::Config("validation_fraction must be in (0, 1)".to_owned()));
        }
        Ok(())
    }

    /// MovieLens preset: 20 epochs with early stopping.
    pub fn movielens() -> Self {
        TrainConfig {
            max_epochs: 20,
            batch_size: 256,
            learning_rate: 1e-3,
            early_stopping: EarlyStopping {
                patience: 2,
                validation_fraction: 0.1,
            },
            optimizer: Optimizer::adam_default(),
        }
    }

    /// MovieLens multi-class preset (batch 1024).
    pub fn movielens_multiclass() -> Self {
        TrainConfig {
            batch_size: 1024,
            ..TrainConfig::movielens()
        }
    }

    /// Click-prediction preset: a single epoch.
    pub fn binary_one_epoch() -> Self {
        TrainConfig {
            max_epochs: 1,
            batch_size: 256,
            learning_rate: 1e-3,
            early_stopping: EarlyStopping {
                patience: 2,
                validation_fraction: 0.1,
            },
            optimizer: Optimizer::adam_default(),
        }
    }
}

impl Optimizer {
    pub fn adam_default() -> Self {
        Optimizer::Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// The random streams a single training run consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainSeeds {
    pub init: u64,
    /// `None` keeps the natural row order every epoch.
    pub shuffle: Option<u64>,
    /// Required when the spec has a positive dropout rate.
    pub dropout: Option<u64>,
}

impl TrainSeeds {
    pub fn fixed(init: u64) -> Self {
        TrainSeeds {
            init,
            shuffle: None,
            dropout: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub train_loss: f64,
    pub valid_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingHistory {
    pub epochs: Vec<EpochStats>,
    pub best_epoch: usize,
    pub stopped_early: bool,
}

struct AdamState<T> {
    m: Vec<T>,
    v: Vec<T>,
    t: u64,
}

impl<T: Scalar> AdamState<T> {
    fn new(n: usize) -> Self {
        AdamState {
            m: vec![T::zero(); n],
            v: vec![T::zero(); n],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [T], grads: &[T], lr: T, beta1: T, beta2: T, eps: T) {
        self.t += 1;
        let t = self.t as i32;
        let bc1 = T::one() - beta1.powi(t);
        let bc2 = T::one() - beta2.powi(t);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = beta1 * self.m[i] + (T::one() - beta1) * g;
            self.v[i] = beta2 * self.v[i] + (T::one() - beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
}

fn draw_dropout_masks<T: Scalar>(
    spec: &ModelSpec<T>,
    seed: u64,
    path: &str,
) -> Vec<Vec<T>> {
    let rate = spec.dropout_rate.to_f64().unwrap();
    let keep_scale = T::one() / (T::one() - spec.dropout_rate);
    let mut stream = crate::rng::Stream::new(seed, path);
    spec.hidden_sizes
        .iter()
        .map(|&n| {
            (0..n)
                .map(|_| {
                    if stream.next_unit_f64() < rate {
                        T::zero()
                    } else {
                        keep_scale
                    }
                })
                .collect()
        })
        .collect()
}

/// Dropout masks for one stochastic inference pass, keyed by pass and row so
/// passes can run in any order (or in parallel) with identical results.
pub fn inference_dropout_masks<T: Scalar>(
    spec: &ModelSpec<T>,
    seed: u64,
    pass: usize,
    row_index: usize,
) -> Vec<Vec<T>> {
    draw_dropout_masks(spec, seed, &format!("mc/pass/{pass}/row/{row_index}"))
}

/// Train a model. The trailing `validation_fraction` of `data` is held out
/// to monitor early stopping; the parameters from the best validation epoch
/// are returned.
pub fn train<T: Scalar>(
    spec: &ModelSpec<T>,
    config: &TrainConfig,
    data: &Dataset<T>,
    seeds: &TrainSeeds,
) -> Result<(ModelParams<T>, TrainingHistory)> {
    let initial = init_params(spec, seeds.init)?;
    train_with_params(spec, config, data, seeds, initial)
}

/// [`train`] from caller-provided initial parameters (for callers that
/// post-process the standard initialization, e.g. rescaling the output head).
pub fn train_with_params<T: Scalar>(
    spec: &ModelSpec<T>,
    config: &TrainConfig,
    data: &Dataset<T>,
    seeds: &TrainSeeds,
    initial: ModelParams<T>,
) -> Result<(ModelParams<T>, TrainingHistory)> {
    spec.validate()?;
    config.validate()?;
    spec.check_schema(&data.schema)?;
    if data.len() < 2 {
        return Err(Error::Usage(
            "training needs at least 2 rows (one is held out for validation)".to_owned(),
        ));
    }
    if spec.dropout_rate > T::zero() && seeds.dropout.is_none() {
        return Err(Error::Config("dropout_rate > 0 requires a dropout seed".to_owned()));
    }
    initial.check_shapes(spec)?;

    let n = data.len();
    let n_valid = ((n as f64) * config.early_stopping.validation_fraction).floor() as usize;
    let n_valid = n_valid.clamp(1, n - 1).min(n - 1);
    let n_train = n - n_valid;
    let train_rows = &data.rows[..n_train];
    let valid_rows = &data.rows[n_train..];

    let mut params = initial;
    let mut adam = AdamState::new(params.values.len());
    let (beta1, beta2, eps) = match config.optimizer {
        Optimizer::Adam { beta1, beta2, eps } => (c::<T>(beta1), c::<T>(beta2), c::<T>(eps)),
    };
    let lr = c::<T>(config.learning_rate);

    let mut history = TrainingHistory {
        epochs: Vec::new(),
        best_epoch: 0,
        stopped_early: false,
    };
    let mut best_valid = f64::INFINITY;
    let mut best_params = params.clone();
    let mut grads = ModelParams::zeros(spec);

    for epoch in 0..config.max_epochs {
        let order = epoch_order(n_train, seeds.shuffle, epoch);

        let mut epoch_loss_sum = 0.0f64;
        for (batch_index, batch) in order.chunks(config.batch_size).enumerate() {
            grads.values.iter_mut().for_each(|g| *g = T::zero());
            let mut batch_loss = T::zero();
            for (slot, &row_ix) in batch.iter().enumerate() {
                let ex = &train_rows[row_ix];
                let masks = match (spec.dropout_rate > T::zero(), seeds.dropout) {
                    (true, Some(ds)) => Some(draw_dropout_masks(
                        spec,
                        ds,
                        &format!("train/epoch/{epoch}/batch/{batch_index}/slot/{slot}"),
                    )),
                    _ => None,
                };
                let trace = forward_trace(spec, &params, ex, masks.as_deref())?;
                let l = backward_with_trace(spec, &params, ex, &trace, masks.as_deref(), &mut grads)?;
                batch_loss += l;
            }
            let scale = T::one() / T::from_usize(batch.len()).unwrap();
            let mean_loss = batch_loss * scale;
            if !mean_loss.is_finite() {
                return Err(Error::Training {
                    epoch,
                    batch: batch_index,
                    msg: format!("non-finite batch loss {mean_loss}"),
                });
            }
            grads.values.iter_mut().for_each(|g| *g *= scale);
            adam.step(&mut params.values, &grads.values, lr, beta1, beta2, eps);
            epoch_loss_sum += mean_loss.to_f64().unwrap() * batch.len() as f64;
        }

        let valid_loss = mean_loss_over(spec, &params, valid_rows)?;
        history.epochs.push(EpochStats {
            train_loss: epoch_loss_sum / n_train as f64,
            valid_loss,
        });

        if valid_loss < best_valid {
            best_valid = valid_loss;
            best_params = params.clone();
            history.best_epoch = epoch;
        } else if epoch - history.best_epoch > config.early_stopping.patience {
            history.stopped_early = true;
            break;
        }
    }

    Ok((best_params, history))
}

/// Mean per-example loss over a slice of rows (no dropout).
pub fn mean_loss_over<T: Scalar>(
    spec: &ModelSpec<T>,
    params: &ModelParams<T>,
    rows: &[Example<T>],
) -> Result<f64> {
    if rows.is_empty() {
        return Err(Error::Usage("mean loss over empty slice".to_owned()));
    }
    let mut total = 0.0f64;
    for ex in rows {
        let trace = forward_trace(spec, params, ex, None)?;
        let l = loss::loss(spec, &trace.logits, &ex.label)?;
        total += l.to_f64().unwrap();
    }
    Ok(total / rows.len() as f64)
}

/// Convenience check used by tests: the multiclass head must stay a proper
/// distribution and the binary head a probability.
pub fn prediction_in_range<T: Scalar>(spec: &ModelSpec<T>, pred: &super::Prediction<T>) -> bool {
    match (spec.task, pred) {
        (TaskKind::Regression, super::Prediction::Value(v)) => v.is_finite(),
        (TaskKind::Binary, super::Prediction::Probability(p)) => {
            *p > T::zero() && *p < T::one()
        }
        (TaskKind::Multiclass(classes), super::Prediction::Distribution(d)) => {
            if d.len() != classes {
                return false;
            }
            let sum: T = d.iter().cloned().sum();
            let tol = c::<T>(1e-9).max(T::epsilon() * c::<T>(32.0));
            d.iter().all(|p| *p >= T::zero() && *p <= T::one())
                && (sum - T::one()).abs() <= tol
        }
        _ => false,
    }
}
