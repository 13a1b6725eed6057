//! Ensembles of small neural recommenders under explicitly controlled
//! randomness, per-example prediction-variation ground truth, and a cheap
//! auxiliary model that infers that variation from the neuron activation
//! strength of a single target model.
//!
//! The pieces, bottom up:
//!
//! - [`nn`]: a deterministic MLP engine (embeddings, ReLU stack, three loss
//!   heads, Adam, early stopping, activation capture, optional dropout).
//! - [`data`]: MovieLens ingestion, a synthetic binary-task generator,
//!   seeded splits, epoch shuffling, delete-1 jackknife folds.
//! - [`ensemble`]: the R0..R7 randomness settings, seed bundles, ensemble
//!   training, and per-(member, example) prediction matrices.
//! - [`variation`]: per-example prediction variation (sample std for value
//!   tasks, summed KL from the mean distribution for multi-class),
//!   percentile buckets, Pearson correlation, and the ensemble-size
//!   delta-ratio analysis.
//! - [`probe`]: per-neuron activation statistics and binary/value feature
//!   extraction from a single target model.
//! - [`estimator`]: the variation-estimation MLP (regression and 5-bucket
//!   classification), its metrics, and the MC-dropout baseline.
//! - [`metrics`]: target-task metrics (MSE, rounded-rating accuracy, AUC,
//!   Brier score) and the temperature sweep.
//! - [`artifacts`]: versioned delimited-text artifact formats with
//!   bit-exact model round-trips.
//!
//! Numeric code is generic over [`scalar::Scalar`] (`f32` or `f64`); the
//! shipped pipelines and all frozen oracles use `f64`, via the aliases
//! below.
//!
//! Determinism is load-bearing everywhere: every random draw comes from a
//! stream keyed by an explicit seed and purpose ([`rng::Stream`]), training
//! sums run in fixed order, and retraining any member from its recorded
//! seeds reproduces it bitwise.

pub mod artifacts;
pub mod data;
pub mod ensemble;
pub mod error;
pub mod estimator;
pub mod metrics;
pub mod nn;
pub mod probe;
pub mod rng;
pub mod scalar;
pub mod variation;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Default scalar type for the shipped pipelines.
pub type F = f64;

pub type ModelSpecF64 = nn::ModelSpec<F>;
pub type ModelParamsF64 = nn::ModelParams<F>;
pub type PredictionF64 = nn::Prediction<F>;
pub type DatasetF64 = data::Dataset<F>;
pub type ExampleF64 = data::Example<F>;
pub type EnsembleF64 = ensemble::Ensemble<F>;
pub type PredictionMatrixF64 = ensemble::PredictionMatrix<F>;
pub type PvTableF64 = variation::PvTable<F>;
pub type BucketSchemeF64 = variation::BucketScheme<F>;
pub type NeuronStatsF64 = probe::NeuronStats<F>;
pub type EstimatorModelF64 = estimator::EstimatorModel<F>;
pub type ModelArtifactF64 = artifacts::ModelArtifact<F>;
