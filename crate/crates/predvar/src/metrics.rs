//! Target-task evaluation: MSE, rounded-rating accuracy, multi-class
//! accuracy, binary AUC, Brier score, and the temperature-selection sweep.

use crate::data::{Dataset, Label, TaskKind};
use crate::error::{Error, Result};
use crate::nn::train::{train, TrainConfig, TrainSeeds};
use crate::nn::{predict_dataset, ModelSpec, Prediction};
use crate::rng::derive_seed;
use crate::scalar::{c, Scalar};

/// Rank-statistic ROC AUC with tied scores counted half. Returns `None`
/// when either class is absent.
pub fn roc_auc<T: Scalar>(scores: &[T], positives: &[bool]) -> Option<T> {
    assert_eq!(scores.len(), positives.len(), "scores and labels must align");
    let pos = positives.iter().filter(|p| **p).count();
    let neg = positives.len() - pos;
    if pos == 0 || neg == 0 {
        return None;
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("finite scores"));

    // Average ranks over tied score runs (1-based ranks).
    let mut ranks = vec![0.0f64; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let avg = (i + 1 + j) as f64 / 2.0;
        for &ix in &order[i..j] {
            ranks[ix] = avg;
        }
        i = j;
    }

    let rank_sum: f64 = ranks
        .iter()
        .zip(positives)
        .filter(|(_, p)| **p)
        .map(|(r, _)| *r)
        .sum();
    let pos_f = pos as f64;
    let neg_f = neg as f64;
    let auc = (rank_sum - pos_f * (pos_f + 1.0) / 2.0) / (pos_f * neg_f);
    Some(T::from_f64_lossy(auc))
}

/// Mean squared distance between the predicted distribution and the one-hot
/// label, averaged over examples. Ranges over [0, 2].
pub fn brier_score<T: Scalar>(distributions: &[Vec<T>], classes: &[usize]) -> Result<T> {
    if distributions.len() != classes.len() || distributions.is_empty() {
        return Err(Error::Input("brier_score needs aligned, non-empty inputs".to_owned()));
    }
    let mut total = T::zero();
    for (dist, &k) in distributions.iter().zip(classes) {
        if k >= dist.len() {
            return Err(Error::Input(format!("class {k} out of range")));
        }
        for (i, &p) in dist.iter().enumerate() {
            let target = if i == k { T::one() } else { T::zero() };
            let d = p - target;
            total += d * d;
        }
    }
    Ok(total / T::from_usize(distributions.len()).unwrap())
}

/// Rating rounded to the closest integer: clipped into [1, 5] first, ties
/// half away from zero.
pub fn round_rating<T: Scalar>(pred: T) -> i64 {
    let clipped = pred.max(c(1.0)).min(c(5.0));
    clipped.round().to_i64().unwrap()
}

/// Metric set for one task; fields irrelevant to the task stay `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetMetrics<T> {
    pub mse: Option<T>,
    pub accuracy: Option<T>,
    pub auc: Option<T>,
    pub brier: Option<T>,
}

/// Evaluate predictions against labels for the given task kind.
pub fn target_metrics<T: Scalar>(
    predictions: &[Prediction<T>],
    labels: &[Label<T>],
    task: TaskKind,
) -> Result<TargetMetrics<T>> {
    if predictions.len() != labels.len() || predictions.is_empty() {
        return Err(Error::Input("target_metrics needs aligned, non-empty inputs".to_owned()));
    }
    let n = T::from_usize(predictions.len()).unwrap();
    match task {
        TaskKind::Regression => {
            let mut se = T::zero();
            let mut hits = 0usize;
            for (p, l) in predictions.iter().zip(labels) {
                let (pred, label) = match (p.as_scalar(), l.as_value()) {
                    (Some(p), Some(l)) => (p, l),
                    _ => return Err(Error::Input("regression expects value predictions/labels".to_owned())),
                };
                let d = pred - label;
                se += d * d;
                if round_rating(pred) == label.to_i64().unwrap_or(i64::MIN) {
                    hits += 1;
                }
            }
            Ok(TargetMetrics {
                mse: Some(se / n),
                accuracy: Some(T::from_usize(hits).unwrap() / n),
                auc: None,
                brier: None,
            })
        }
        TaskKind::Binary => {
            let mut scores = Vec::with_capacity(predictions.len());
            let mut pos = Vec::with_capacity(predictions.len());
            let mut hits = 0usize;
            for (p, l) in predictions.iter().zip(labels) {
                let (score, label) = match (p.as_scalar(), l.as_value()) {
                    (Some(p), Some(l)) => (p, l),
                    _ => return Err(Error::Input("binary expects value predictions/labels".to_owned())),
                };
                let positive = label == T::one();
                scores.push(score);
                pos.push(positive);
                let predicted_positive = score >= c(0.5);
                if predicted_positive == positive {
                    hits += 1;
                }
            }
            Ok(TargetMetrics {
                mse: None,
                accuracy: Some(T::from_usize(hits).unwrap() / n),
                auc: roc_auc(&scores, &pos),
                brier: None,
            })
        }
        TaskKind::Multiclass(_) => {
            let mut dists = Vec::with_capacity(predictions.len());
            let mut classes = Vec::with_capacity(predictions.len());
            let mut hits = 0usize;
            for (p, l) in predictions.iter().zip(labels) {
                let (dist, label) = match (p.as_distribution(), l.as_class()) {
                    (Some(d), Some(k)) => (d, k),
                    _ => return Err(Error::Input("multiclass expects distributions/class labels".to_owned())),
                };
                let argmax = dist
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite probabilities"))
                    .map(|(i, _)| i)
                    .unwrap();
                if argmax == label {
                    hits += 1;
                }
                dists.push(dist.to_vec());
                classes.push(label);
            }
            Ok(TargetMetrics {
                mse: None,
                accuracy: Some(T::from_usize(hits).unwrap() / n),
                auc: None,
                brier: Some(brier_score(&dists, &classes)?),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureResult<T> {
    pub temperature: T,
    pub brier: T,
    pub accuracy: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureSweep<T> {
    pub results: Vec<TemperatureResult<T>>,
    pub selected: T,
}

/// Train one model per candidate temperature (identical seeds across the
/// grid) and select by best Brier score; ties prefer higher accuracy, then
/// smaller temperature.
pub fn temperature_sweep<T: Scalar>(
    spec: &ModelSpec<T>,
    config: &TrainConfig,
    train_data: &Dataset<T>,
    valid_data: &Dataset<T>,
    t_grid: &[T],
    seed: u64,
) -> Result<TemperatureSweep<T>> {
    if !matches!(spec.task, TaskKind::Multiclass(_)) {
        return Err(Error::Usage("temperature_sweep applies to multiclass tasks".to_owned()));
    }
    if t_grid.is_empty() {
        return Err(Error::Config("temperature grid is empty".to_owned()));
    }
    let seeds = TrainSeeds {
        init: derive_seed(seed, "temperature-sweep/init"),
        shuffle: Some(derive_seed(seed, "temperature-sweep/shuffle")),
        dropout: None,
    };
    let labels: Vec<Label<T>> = valid_data.rows.iter().map(|r| r.label).collect();

    let mut results = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let mut candidate = spec.clone();
        candidate.temperature = t;
        candidate.validate()?;
        let (params, _) = train(&candidate, config, train_data, &seeds)?;
        let preds = predict_dataset(&candidate, &params, valid_data)?;
        let metrics = target_metrics(&preds, &labels, candidate.task)?;
        results.push(TemperatureResult {
            temperature: t,
            brier: metrics.brier.expect("multiclass reports brier"),
            accuracy: metrics.accuracy.expect("multiclass reports accuracy"),
        });
    }

    let selected = results
        .iter()
        .min_by(|a, b| {
            a.brier
                .partial_cmp(&b.brier)
                .unwrap()
                .then(b.accuracy.partial_cmp(&a.accuracy).unwrap())
                .then(a.temperature.partial_cmp(&b.temperature).unwrap())
        })
        .map(|r| r.temperature)
        .unwrap();
    Ok(TemperatureSweep { results, selected })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn auc_worked_example() {
        // positives scored [0.9, 0.4], negatives [0.6, 0.1] -> 3/4 pairs ordered
        let scores = [0.9, 0.4, 0.6, 0.1];
        let pos = [true, true, false, false];
        assert_relative_eq!(roc_auc(&scores, &pos).unwrap(), 0.75, epsilon = 1e-12);
    }

    #[test]
    fn auc_of_labels_as_scores_is_one() {
        let pos = [true, false, true, false, false];
        let scores: Vec<f64> = pos.iter().map(|&p| if p { 1.0 } else { 0.0 }).collect();
        assert_relative_eq!(roc_auc(&scores, &pos).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn auc_negation_flips() {
        let scores = [0.3, 0.8, 0.1, 0.9, 0.5];
        let pos = [false, true, false, true, true];
        let auc = roc_auc(&scores, &pos).unwrap();
        let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
        let flipped = roc_auc(&neg, &pos).unwrap();
        assert_relative_eq!(flipped, 1.0 - auc, epsilon = 1e-12);
    }

    #[test]
    fn auc_all_ties_is_half() {
        let scores = [0.2; 6];
        let pos = [true, false, true, false, true, false];
        assert_relative_eq!(roc_auc(&scores, &pos).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn auc_single_class_is_undefined() {
        assert!(roc_auc(&[0.1, 0.2], &[true, true]).is_none());
    }

    #[test]
    fn regression_metrics_worked_example() {
        let preds = vec![Prediction::Value(2.4), Prediction::Value(3.6)];
        let labels = vec![Label::Value(2.0), Label::Value(4.0)];
        let m = target_metrics(&preds, &labels, TaskKind::Regression).unwrap();
        assert_relative_eq!(m.accuracy.unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(m.mse.unwrap(), 0.16, epsilon = 1e-12);
    }

    #[test]
    fn rounding_rule() {
        assert_eq!(round_rating(2.5), 3); // half away from zero
        assert_eq!(round_rating(2.49), 2);
        assert_eq!(round_rating(0.2), 1); // clipped into [1,5] first
        assert_eq!(round_rating(9.0), 5);
    }

    #[test]
    fn perfect_multiclass_brier_zero() {
        let preds = vec![
            Prediction::Distribution(vec![1.0, 0.0, 0.0]),
            Prediction::Distribution(vec![0.0, 0.0, 1.0]),
        ];
        let labels = vec![Label::Class(0), Label::Class(2)];
        let m = target_metrics(&preds, &labels, TaskKind::Multiclass(3)).unwrap();
        assert_eq!(m.brier.unwrap(), 0.0);
        assert_eq!(m.accuracy.unwrap(), 1.0);
    }

    #[test]
    fn brier_bounds() {
        // worst case: all mass on the wrong class -> 2
        let b = brier_score(&[vec![0.0, 1.0]], &[0]).unwrap();
        assert_relative_eq!(b, 2.0, epsilon = 1e-12);
    }
}
