//! Activation-strength probing of a single target model: per-neuron
//! normalization statistics over a reference dataset, and per-example
//! binary/value feature vectors for the variation estimator.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::nn::{forward, ModelParams, ModelSpec};
use crate::scalar::Scalar;

/// Per-neuron statistics of the raw post-ReLU output over a reference
/// dataset, in layer order.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuronStats<T> {
    pub mean: Vec<T>,
    pub std: Vec<T>,
    /// Fraction of reference examples on which the neuron output was > 0.
    pub activation_rate: Vec<T>,
}

impl<T: Scalar> NeuronStats<T> {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }
}

/// Layer index of each neuron position, for reporting.
pub fn neuron_layers<T: Scalar>(spec: &ModelSpec<T>) -> Vec<usize> {
    let mut layers = Vec::with_capacity(spec.total_neurons());
    for (l, &n) in spec.hidden_sizes.iter().enumerate() {
        layers.extend(std::iter::repeat_n(l, n));
    }
    layers
}

/// Single sequential pass over `reference_data` with activation capture,
/// accumulating mean, sample standard deviation (divisor n-1), and
/// activation rate per neuron.
pub fn neuron_stats<T: Scalar>(
    spec: &ModelSpec<T>,
    params: &ModelParams<T>,
    reference_data: &Dataset<T>,
) -> Result<NeuronStats<T>> {
    if reference_data.is_empty() {
        return Err(Error::Usage("neuron_stats needs a non-empty reference dataset".to_owned()));
    }
    let width = spec.total_neurons();
    let mut mean = vec![T::zero(); width];
    let mut m2 = vec![T::zero(); width];
    let mut active = vec![0usize; width];

    let mut count = T::zero();
    for ex in &reference_data.rows {
        let (_, captured) = forward(spec, params, ex, true)?;
        let raw = captured.expect("capture requested");
        count += T::one();
        for i in 0..width {
            let x = raw[i];
            if x > T::zero() {
                active[i] += 1;
            }
            let delta = x - mean[i];
            mean[i] += delta / count;
            m2[i] += delta * (x - mean[i]);
        }
    }

    let n = reference_data.len();
    let std = if n < 2 {
        vec![T::zero(); width]
    } else {
        let denom = T::from_usize(n - 1).unwrap();
        m2.iter().map(|&s| (s / denom).max(T::zero()).sqrt()).collect()
    };
    let rate = active
        .iter()
        .map(|&a| T::from_usize(a).unwrap() / T::from_usize(n).unwrap())
        .collect();
    Ok(NeuronStats {
        mean,
        std,
        activation_rate: rate,
    })
}

/// Activation-strength features of one example: whether each neuron fired,
/// and its normalized output value.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationVector<T> {
    pub binary: Vec<bool>,
    pub value: Vec<T>,
}

/// Probe one example through the model. `value[i]` is
/// `(raw_i - mean_i) / std_i`, forced to 0 for dead neurons (std 0).
pub fn activation_vector<T: Scalar>(
    spec: &ModelSpec<T>,
    params: &ModelParams<T>,
    stats: &NeuronStats<T>,
    example: &crate::data::Example<T>,
) -> Result<ActivationVector<T>> {
    if stats.len() != spec.total_neurons() {
        return Err(Error::Config(format!(
            "stats cover {} neurons, model has {}",
            stats.len(),
            spec.total_neurons()
        )));
    }
    let (_, captured) = forward(spec, params, example, true)?;
    let raw = captured.expect("capture requested");
    let binary: Vec<bool> = raw.iter().map(|&x| x > T::zero()).collect();
    let value: Vec<T> = raw
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            if stats.std[i] == T::zero() {
                T::zero()
            } else {
                (x - stats.mean[i]) / stats.std[i]
            }
        })
        .collect();
    Ok(ActivationVector { binary, value })
}

/// Which activation-strength feature families feed the estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureMode {
    /// Binary activation indicators only.
    B,
    /// Binary indicators followed by normalized values.
    BV,
}

impl FeatureMode {
    pub fn code(&self) -> &'static str {
        match self {
            FeatureMode::B => "B",
            FeatureMode::BV => "BV",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "B" => Ok(FeatureMode::B),
            "BV" => Ok(FeatureMode::BV),
            _ => Err(Error::Config(format!("unknown feature mode {s:?} (expected B or BV)"))),
        }
    }

    pub fn width(&self, total_neurons: usize) -> usize {
        match self {
            FeatureMode::B => total_neurons,
            FeatureMode::BV => 2 * total_neurons,
        }
    }
}

/// Estimator input rows for a whole dataset, aligned with its row ids.
pub fn feature_matrix<T: Scalar>(
    spec: &ModelSpec<T>,
    params: &ModelParams<T>,
    stats: &NeuronStats<T>,
    data: &Dataset<T>,
    mode: FeatureMode,
) -> Result<(Vec<Vec<T>>, Vec<u64>)> {
    let mut rows = Vec::with_capacity(data.len());
    for ex in &data.rows {
        let av = activation_vector(spec, params, stats, ex)?;
        let mut feat = Vec::with_capacity(mode.width(spec.total_neurons()));
        feat.extend(av.binary.iter().map(|&b| if b { T::one() } else { T::zero() }));
        if mode == FeatureMode::BV {
            feat.extend_from_slice(&av.value);
        }
        rows.push(feat);
    }
    Ok((rows, data.row_ids()))
}
