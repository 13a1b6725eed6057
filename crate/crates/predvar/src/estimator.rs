//! The variation estimator: a small MLP mapping activation-strength features
//! of a single target model to the ensemble's per-example prediction
//! variation, as a regression or a percentile-bucket classification task.
//! Also the Monte-Carlo dropout baseline it is compared against.

use crate::data::{CategoricalFeature, Dataset, Example, FeatureSchema, Label, Provenance, TaskKind};
use crate::error::{Error, Result};
use crate::metrics::roc_auc;
use crate::nn::train::{
    inference_dropout_masks, train, train_with_params, EarlyStopping, Optimizer, TrainConfig,
    TrainSeeds,
};
use crate::nn::{forward_trace, init_params, predict_from_logits, ModelParams, ModelSpec, Prediction};
use crate::probe::FeatureMode;
use crate::rng::derive_seed;
use crate::scalar::{c, Scalar};
use crate::variation::{pearson, value_pv, MeanPrediction, PvRow, PvTable};

/// What the estimator predicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Regression,
    /// Percentile-bucket classification with the given bucket count.
    Classification(usize),
}

/// Estimator hyperparameters. Defaults: hidden [100, 50], batch 256, Adam at
/// 0.001, up to 150 epochs with early stopping, 5 buckets for classification.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorSpec {
    pub hidden_sizes: Vec<usize>,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub objective: Objective,
    pub feature_mode: FeatureMode,
}

impl EstimatorSpec {
    pub fn regression(feature_mode: FeatureMode) -> Self {
        EstimatorSpec {
            hidden_sizes: vec![100, 50],
            batch_size: 256,
            learning_rate: 1e-3,
            max_epochs: 150,
            objective: Objective::Regression,
            feature_mode,
        }
    }

    pub fn classification(feature_mode: FeatureMode) -> Self {
        EstimatorSpec {
            objective: Objective::Classification(5),
            ..EstimatorSpec::regression(feature_mode)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden_sizes.is_empty() || self.hidden_sizes.contains(&0) {
            return Err(Error::Config("estimator hidden sizes must be positive".to_owned()));
        }
        #[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
        if self.batch_size == 0 || self.max_epochs == 0 || !(self.learning_rate > 0.0) {
            return Err(Error::Config("estimator training knobs must be positive".to_owned()));
        }
        if let Objective::Classification(k) = self.objective {
            if k < 2 {
                return Err(Error::Config("classification needs >= 2 buckets".to_owned()));
            }
        }
        Ok(())
    }

    fn train_config(&self) -> TrainConfig {
        TrainConfig {
            max_epochs: self.max_epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            early_stopping: EarlyStopping {
                patience: 10,
                validation_fraction: 0.1,
            },
            optimizer: Optimizer::adam_default(),
        }
    }
}

/// Initial output-head scale for the clamped regression objective.
///
/// The clamp passes no gradient outside its range, so training must start
/// with raw outputs near zero (just inside the active region) instead of the
/// O(1) outputs a fan-scaled head produces against a [0, mean+3*std] target
/// band.
const REGRESSOR_HEAD_INIT_SCALE: f64 = 0.05;

/// Output clamp for the regression objective, computed from training labels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionClamp<T> {
    pub lower: T,
    pub upper: T,
}

impl<T: Scalar> RegressionClamp<T> {
    /// `[0, mean + 3*std]` of the training variation labels.
    pub fn from_training_labels(labels: &[T]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Usage("clamp needs training labels".to_owned()));
        }
        let n = T::from_usize(labels.len()).unwrap();
        let mean = labels.iter().cloned().sum::<T>() / n;
        let std = if labels.len() > 1 {
            let ss: T = labels
                .iter()
                .map(|&l| {
                    let d = l - mean;
                    d * d
                })
                .sum();
            (ss / (n - T::one())).sqrt()
        } else {
            T::zero()
        };
        let mut upper = mean + c::<T>(3.0) * std;
        #[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
        if !(upper > T::zero()) {
            // Degenerate labels (all zero): keep the clamp well-formed.
            upper = T::min_positive_value();
        }
        Ok(RegressionClamp {
            lower: T::zero(),
            upper,
        })
    }
}

/// A trained variation estimator.
#[derive(Debug, Clone)]
pub struct EstimatorModel<T> {
    pub spec: ModelSpec<T>,
    pub params: ModelParams<T>,
    pub objective: Objective,
    pub feature_mode: FeatureMode,
    pub clamp: Option<RegressionClamp<T>>,
    /// The exact seeds the training run consumed (for artifact dumps).
    pub seeds: TrainSeeds,
}

fn features_to_dataset<T: Scalar>(
    features: &[Vec<T>],
    labels: Vec<Label<T>>,
    task: TaskKind,
) -> Result<Dataset<T>> {
    if features.is_empty() || features.len() != labels.len() {
        return Err(Error::Usage("features and labels must align and be non-empty".to_owned()));
    }
    let width = features[0].len();
    let rows: Vec<Example<T>> = features
        .iter()
        .zip(labels)
        .enumerate()
        .map(|(i, (f, label))| Example {
            row_id: i as u64,
            categorical: vec![],
            numeric: f.clone(),
            label,
        })
        .collect();
    Dataset::new(
        FeatureSchema {
            categorical: Vec::<CategoricalFeature>::new(),
            numeric: width,
            task,
        },
        rows,
        Provenance {
            source: "activation-features".to_owned(),
            split_name: "estimator-train".to_owned(),
            parent_seed: None,
        },
    )
}

/// Train the regression estimator. Outputs are clamped to
/// `[0, mean + 3*std]` of the training labels inside the training graph and
/// at inference.
pub fn train_regressor<T: Scalar>(
    features: &[Vec<T>],
    pv_labels: &[T],
    estimator_spec: &EstimatorSpec,
    seed: u64,
) -> Result<EstimatorModel<T>> {
    estimator_spec.validate()?;
    if pv_labels.iter().any(|l| *l < T::zero()) {
        return Err(Error::Input("variation labels must be non-negative".to_owned()));
    }
    let clamp = RegressionClamp::from_training_labels(pv_labels)?;
    let labels: Vec<Label<T>> = pv_labels.iter().map(|&v| Label::Value(v)).collect();
    let data = features_to_dataset(features, labels, TaskKind::Regression)?;
    let spec = ModelSpec {
        task: TaskKind::Regression,
        embeddings: vec![],
        numeric_inputs: data.schema.numeric,
        hidden_sizes: estimator_spec.hidden_sizes.clone(),
        temperature: T::one(),
        dropout_rate: T::zero(),
        output_clamp: Some((clamp.lower, clamp.upper)),
    };
    let seeds = TrainSeeds {
        init: derive_seed(seed, "estimator/init"),
        shuffle: Some(derive_seed(seed, "estimator/shuffle")),
        dropout: None,
    };
    let mut initial = init_params(&spec, seeds.init)?;
    let head_w = initial.layout.segments.len() - 2;
    for w in initial.segment_mut(head_w) {
        *w *= c::<T>(REGRESSOR_HEAD_INIT_SCALE);
    }
    let (params, _) = train_with_params(&spec, &estimator_spec.train_config(), &data, &seeds, initial)?;
    Ok(EstimatorModel {
        spec,
        params,
        objective: Objective::Regression,
        feature_mode: estimator_spec.feature_mode,
        clamp: Some(clamp),
        seeds,
    })
}

/// Train the bucket classifier. `bucket_labels` are 1-based labels from a
/// [`crate::variation::BucketScheme`] built on the training variations.
pub fn train_classifier<T: Scalar>(
    features: &[Vec<T>],
    bucket_labels: &[usize],
    estimator_spec: &EstimatorSpec,
    seed: u64,
) -> Result<EstimatorModel<T>> {
    estimator_spec.validate()?;
    let k = match estimator_spec.objective {
        Objective::Classification(k) => k,
        Objective::Regression => {
            return Err(Error::Usage("train_classifier needs a classification objective".to_owned()))
        }
    };
    for &b in bucket_labels {
        if b < 1 || b > k {
            return Err(Error::Input(format!("bucket label {b} outside 1..={k}")));
        }
    }
    let mut present = vec![false; k];
    for &b in bucket_labels {
        present[b - 1] = true;
    }
    for (b, seen) in present.iter().enumerate() {
        if !seen {
            log::warn!("bucket {} absent from training labels; proceeding", b + 1);
        }
    }

    let labels: Vec<Label<T>> = bucket_labels.iter().map(|&b| Label::Class(b - 1)).collect();
    let data = features_to_dataset(features, labels, TaskKind::Multiclass(k))?;
    let spec = ModelSpec {
        task: TaskKind::Multiclass(k),
        embeddings: vec![],
        numeric_inputs: data.schema.numeric,
        hidden_sizes: estimator_spec.hidden_sizes.clone(),
        temperature: T::one(),
        dropout_rate: T::zero(),
        output_clamp: None,
    };
    let seeds = TrainSeeds {
        init: derive_seed(seed, "estimator/init"),
        shuffle: Some(derive_seed(seed, "estimator/shuffle")),
        dropout: None,
    };
    let (params, _) = train(&spec, &estimator_spec.train_config(), &data, &seeds)?;
    Ok(EstimatorModel {
        spec,
        params,
        objective: Objective::Classification(k),
        feature_mode: estimator_spec.feature_mode,
        clamp: None,
        seeds,
    })
}

fn feature_example<T: Scalar>(features: &[T], row_id: u64) -> Example<T> {
    Example {
        row_id,
        categorical: vec![],
        numeric: features.to_vec(),
        label: Label::Value(T::zero()),
    }
}

/// Clamped scalar predictions of the regression estimator.
pub fn predict_values<T: Scalar>(model: &EstimatorModel<T>, features: &[Vec<T>]) -> Result<Vec<T>> {
    if model.objective != Objective::Regression {
        return Err(Error::Usage("predict_values needs a regression estimator".to_owned()));
    }
    features
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let ex = feature_example(f, i as u64);
            let trace = forward_trace(&model.spec, &model.params, &ex, None)?;
            match predict_from_logits(&model.spec, &trace.logits) {
                Prediction::Value(v) => Ok(v),
                _ => unreachable!("regression head"),
            }
        })
        .collect()
}

/// Per-bucket probabilities of the classification estimator.
pub fn predict_proba<T: Scalar>(model: &EstimatorModel<T>, features: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
    if !matches!(model.objective, Objective::Classification(_)) {
        return Err(Error::Usage("predict_proba needs a classification estimator".to_owned()));
    }
    features
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let ex = feature_example(f, i as u64);
            let trace = forward_trace(&model.spec, &model.params, &ex, None)?;
            match predict_from_logits(&model.spec, &trace.logits) {
                Prediction::Distribution(d) => Ok(d),
                _ => unreachable!("classification head"),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionEval<T> {
    pub mse: T,
    /// `None` when the test labels are degenerate (zero variance).
    pub r2: Option<T>,
}

/// MSE and R² on held-out features/labels.
pub fn eval_regression<T: Scalar>(
    model: &EstimatorModel<T>,
    features: &[Vec<T>],
    pv_labels: &[T],
) -> Result<RegressionEval<T>> {
    if features.len() != pv_labels.len() || features.is_empty() {
        return Err(Error::Input("eval_regression needs aligned, non-empty inputs".to_owned()));
    }
    let preds = predict_values(model, features)?;
    Ok(regression_fit(&preds, pv_labels))
}

/// `mse` and `r2 = 1 - SS_res/SS_tot` of predictions against labels.
pub fn regression_fit<T: Scalar>(predictions: &[T], labels: &[T]) -> RegressionEval<T> {
    let n = T::from_usize(labels.len()).unwrap();
    let mean = labels.iter().cloned().sum::<T>() / n;
    let mut ss_res = T::zero();
    let mut ss_tot = T::zero();
    for (&p, &l) in predictions.iter().zip(labels) {
        let r = p - l;
        ss_res += r * r;
        let d = l - mean;
        ss_tot += d * d;
    }
    RegressionEval {
        mse: ss_res / n,
        r2: (ss_tot > T::zero()).then(|| T::one() - ss_res / ss_tot),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationEval<T> {
    /// One-vs-rest AUC per bucket (1-based bucket b at index b-1); `None`
    /// when the bucket is absent from the test labels.
    pub auc: Vec<Option<T>>,
    /// Row-normalized confusion matrix: `confusion[actual][predicted]`.
    pub confusion: Vec<Vec<T>>,
    pub accuracy: T,
}

/// Per-bucket AUC (on the bucket's predicted probability), row-normalized
/// confusion matrix of argmax predictions, and accuracy.
pub fn eval_classification<T: Scalar>(
    model: &EstimatorModel<T>,
    features: &[Vec<T>],
    bucket_labels: &[usize],
    k: usize,
) -> Result<ClassificationEval<T>> {
    if features.len() != bucket_labels.len() || features.is_empty() {
        return Err(Error::Input("eval_classification needs aligned, non-empty inputs".to_owned()));
    }
    for &b in bucket_labels {
        if b < 1 || b > k {
            return Err(Error::Input(format!("bucket label {b} outside 1..={k}")));
        }
    }
    let probas = predict_proba(model, features)?;

    let auc: Vec<Option<T>> = (0..k)
        .map(|b| {
            let scores: Vec<T> = probas.iter().map(|p| p[b]).collect();
            let positives: Vec<bool> = bucket_labels.iter().map(|&l| l - 1 == b).collect();
            roc_auc(&scores, &positives)
        })
        .collect();

    let mut counts = vec![vec![0usize; k]; k];
    let mut hits = 0usize;
    for (p, &actual) in probas.iter().zip(bucket_labels) {
        let predicted = p
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite probabilities"))
            .map(|(i, _)| i)
            .unwrap();
        counts[actual - 1][predicted] += 1;
        if predicted == actual - 1 {
            hits += 1;
        }
    }
    let confusion: Vec<Vec<T>> = counts
        .iter()
        .map(|row| {
            let total: usize = row.iter().sum();
            if total == 0 {
                vec![T::zero(); k]
            } else {
                let t = T::from_usize(total).unwrap();
                row.iter().map(|&c| T::from_usize(c).unwrap() / t).collect()
            }
        })
        .collect();

    Ok(ClassificationEval {
        auc,
        confusion,
        accuracy: T::from_usize(hits).unwrap() / T::from_usize(bucket_labels.len()).unwrap(),
    })
}

/// Train one model with dropout live on the hidden layers, then run
/// `passes` stochastic inference passes per test example and take the
/// per-example standard deviation as the dropout variation estimate.
///
/// `rate` of 0 keeps every unit (deterministic inference, variation 0).
/// Value tasks only.
pub fn mc_dropout_pv<T: Scalar>(
    spec: &ModelSpec<T>,
    config: &TrainConfig,
    train_data: &Dataset<T>,
    test_data: &Dataset<T>,
    rate: f64,
    passes: usize,
    seed: u64,
) -> Result<PvTable<T>> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::Config(format!("dropout rate {rate} outside [0, 1)")));
    }
    if passes < 2 {
        return Err(Error::Config("mc_dropout_pv needs at least 2 passes".to_owned()));
    }
    if matches!(spec.task, TaskKind::Multiclass(_)) {
        return Err(Error::Usage(
            "dropout variation is defined for value tasks (regression/binary)".to_owned(),
        ));
    }
    let mut dropout_spec = spec.clone();
    dropout_spec.dropout_rate = c(rate);
    dropout_spec.validate()?;

    let seeds = TrainSeeds {
        init: derive_seed(seed, "dropout/init"),
        shuffle: Some(derive_seed(seed, "dropout/shuffle")),
        dropout: (rate > 0.0).then(|| derive_seed(seed, "dropout/train-mask")),
    };
    let (params, _) = train(&dropout_spec, config, train_data, &seeds)?;

    let mc_seed = derive_seed(seed, "dropout/inference-mask");
    let mut rows = Vec::with_capacity(test_data.len());
    for (row_index, ex) in test_data.rows.iter().enumerate() {
        let mut preds: Vec<T> = Vec::with_capacity(passes);
        for pass in 0..passes {
            let masks = if rate > 0.0 {
                Some(inference_dropout_masks(&dropout_spec, mc_seed, pass, row_index))
            } else {
                None
            };
            let trace = forward_trace(&dropout_spec, &params, ex, masks.as_deref())?;
            let pred = predict_from_logits(&dropout_spec, &trace.logits)
                .as_scalar()
                .expect("value task");
            preds.push(pred);
        }
        let pv = value_pv(&preds)?;
        let mean = preds.iter().cloned().sum::<T>() / T::from_usize(passes).unwrap();
        rows.push(PvRow {
            row_id: ex.row_id,
            pv,
            mean_prediction: MeanPrediction::Value(mean),
            pv_coefficient: (mean != T::zero()).then(|| pv / mean.abs()),
        });
    }
    Ok(PvTable { rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PvComparison<T> {
    pub pearson: T,
    pub rmse: T,
    /// R² of `pv_a` against `pv_b` taken as ground truth.
    pub r2: Option<T>,
}

/// Compare two aligned variation tables, treating `pv_b` as ground truth.
pub fn compare_pv<T: Scalar>(pv_a: &PvTable<T>, pv_b: &PvTable<T>) -> Result<PvComparison<T>> {
    if pv_a.row_ids() != pv_b.row_ids() {
        return Err(Error::Input("compare_pv row ids do not align".to_owned()));
    }
    let a = pv_a.pvs();
    let b = pv_b.pvs();
    let fit = regression_fit(&a, &b);
    Ok(PvComparison {
        pearson: pearson(&a, &b)?,
        rmse: fit.mse.sqrt(),
        r2: fit.r2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn clamp_from_labels() {
        let labels = [0.1f64, 0.2, 0.3];
        let clamp = RegressionClamp::from_training_labels(&labels).unwrap();
        assert_eq!(clamp.lower, 0.0);
        assert_relative_eq!(clamp.upper, 0.2 + 3.0 * 0.1, epsilon = 1e-12);
    }

    #[test]
    fn constant_labels_give_constant_predictor() {
        let features: Vec<Vec<f64>> = (0..40).map(|i| vec![(i % 7) as f64, (i % 3) as f64]).collect();
        let labels = vec![0.25f64; 40];
        let spec = EstimatorSpec {
            hidden_sizes: vec![8],
            batch_size: 8,
            learning_rate: 0.02,
            max_epochs: 100,
            ..EstimatorSpec::regression(FeatureMode::BV)
        };
        let model = train_regressor(&features, &labels, &spec, 3).unwrap();
        let eval = eval_regression(&model, &features, &labels).unwrap();
        // clamp forces predictions into [0, 0.25]; MSE ends up tiny
        assert!(eval.mse < 0.01, "mse {}", eval.mse);
        assert!(eval.r2.is_none(), "degenerate labels leave r2 undefined");
    }

    #[test]
    fn clamp_bounds_every_prediction() {
        let features: Vec<Vec<f64>> = (0..60).map(|i| vec![i as f64 * 10.0]).collect();
        let labels: Vec<f64> = (0..60).map(|i| 0.01 * i as f64).collect();
        let spec = EstimatorSpec {
            hidden_sizes: vec![6],
            max_epochs: 3,
            ..EstimatorSpec::regression(FeatureMode::B)
        };
        let model = train_regressor(&features, &labels, &spec, 1).unwrap();
        let clamp = model.clamp.unwrap();
        let wild: Vec<Vec<f64>> = vec![vec![-1e6], vec![1e6], vec![0.0]];
        for p in predict_values(&model, &wild).unwrap() {
            assert!(p >= clamp.lower && p <= clamp.upper, "prediction {p} escaped clamp");
        }
    }

    #[test]
    fn separable_features_classify_perfectly() {
        // one-hot features that literally encode the bucket
        let k = 3;
        let features: Vec<Vec<f64>> = (0..90)
            .map(|i| {
                let b = i % k;
                (0..k).map(|j| if j == b { 1.0 } else { 0.0 }).collect()
            })
            .collect();
        let labels: Vec<usize> = (0..90).map(|i| (i % k) + 1).collect();
        let spec = EstimatorSpec {
            hidden_sizes: vec![16],
            batch_size: 8,
            learning_rate: 0.02,
            max_epochs: 100,
            objective: Objective::Classification(k),
            ..EstimatorSpec::classification(FeatureMode::B)
        };
        let model = train_classifier(&features, &labels, &spec, 5).unwrap();
        let eval = eval_classification(&model, &features, &labels, k).unwrap();
        assert!(eval.accuracy > 0.99, "accuracy {}", eval.accuracy);
        for b in 0..k {
            assert_relative_eq!(eval.confusion[b][b], 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn missing_training_bucket_warns_and_proceeds() {
        // bucket 2 never appears; training must not fail
        let features: Vec<Vec<f64>> = (0..60).map(|i| vec![(i % 2) as f64]).collect();
        let labels: Vec<usize> = (0..60).map(|i| if i % 2 == 0 { 1 } else { 3 }).collect();
        let spec = EstimatorSpec {
            hidden_sizes: vec![4],
            max_epochs: 3,
            objective: Objective::Classification(3),
            ..EstimatorSpec::classification(FeatureMode::B)
        };
        let model = train_classifier(&features, &labels, &spec, 1).unwrap();
        let eval = eval_classification(&model, &features, &labels, 3).unwrap();
        assert!(eval.auc[1].is_none(), "absent bucket has undefined AUC");
    }

    #[test]
    fn random_features_have_chance_auc() {
        let mut stream = crate::rng::Stream::new(11, "noise");
        let features: Vec<Vec<f64>> = (0..400)
            .map(|_| (0..8).map(|_| stream.next_standard_normal()).collect())
            .collect();
        let labels: Vec<usize> = (0..400).map(|_| 1 + stream.next_below(5) as usize).collect();
        let spec = EstimatorSpec {
            hidden_sizes: vec![8],
            max_epochs: 10,
            ..EstimatorSpec::classification(FeatureMode::B)
        };
        let model = train_classifier(&features, &labels, &spec, 2).unwrap();
        let eval = eval_classification(&model, &features, &labels, 5).unwrap();
        for auc in eval.auc.iter().flatten() {
            assert!((auc - 0.5).abs() < 0.2, "auc {auc} far from chance");
        }
        for row in &eval.confusion {
            let total: f64 = row.iter().sum();
            assert!((total - 1.0).abs() < 1e-9, "confusion row sums to {total}");
        }
    }

    #[test]
    fn eval_regression_worked_example() {
        let fit = regression_fit(&[1.0, 2.0, 4.0], &[1.0, 2.0, 3.0]);
        assert_relative_eq!(fit.mse, 1.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(fit.r2.unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn eval_regression_perfect_and_mean() {
        let labels = [1.0, 2.0, 3.0];
        let perfect = regression_fit(&labels, &labels);
        assert_eq!(perfect.mse, 0.0);
        assert_relative_eq!(perfect.r2.unwrap(), 1.0, epsilon = 1e-12);
        let mean_pred = [2.0, 2.0, 2.0];
        let baseline = regression_fit(&mean_pred, &labels);
        assert_relative_eq!(baseline.r2.unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn compare_pv_identity_and_shift() {
        let table = |pvs: &[f64]| PvTable {
            rows: pvs
                .iter()
                .enumerate()
                .map(|(i, &pv)| PvRow {
                    row_id: i as u64,
                    pv,
                    mean_prediction: MeanPrediction::Value(1.0),
                    pv_coefficient: None,
                })
                .collect(),
        };
        let gt = table(&[0.1, 0.2, 0.3, 0.4]);
        let same = compare_pv(&gt, &gt).unwrap();
        assert_relative_eq!(same.pearson, 1.0, epsilon = 1e-12);
        assert_eq!(same.rmse, 0.0);
        assert_relative_eq!(same.r2.unwrap(), 1.0, epsilon = 1e-12);

        let shifted = table(&[0.2, 0.3, 0.4, 0.5]);
        let cmp = compare_pv(&shifted, &gt).unwrap();
        assert_relative_eq!(cmp.pearson, 1.0, epsilon = 1e-12);
        assert_relative_eq!(cmp.rmse, 0.1, epsilon = 1e-12);
    }
}
