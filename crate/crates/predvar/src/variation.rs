//! Prediction-variation quantification.
//!
//! For value tasks (regression, binary) the per-example variation is the
//! sample standard deviation of member predictions; for multi-class tasks it
//! is the summed KL divergence of each member's distribution from the
//! member-wise mean. Also here: percentile bucketing of variation values,
//! Pearson correlation, and the delta-ratio ensemble-size analysis.

use crate::ensemble::PredictionMatrix;
use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::scalar::{c, Scalar};

/// Sample standard deviation (divisor N-1) of one example's member
/// predictions. Exactly zero when all predictions are identical.
pub fn value_pv<T: Scalar>(predictions: &[T]) -> Result<T> {
    let n = predictions.len();
    if n < 2 {
        return Err(Error::Usage(format!("value_pv needs >= 2 predictions, got {n}")));
    }
    let first = predictions[0];
    if predictions.iter().all(|p| *p == first) {
        return Ok(T::zero());
    }
    let count = T::from_usize(n).unwrap();
    let mean = predictions.iter().cloned().sum::<T>() / count;
    let ss: T = predictions
        .iter()
        .map(|&p| {
            let d = p - mean;
            d * d
        })
        .sum();
    Ok((ss / (count - T::one())).sqrt())
}

/// Summed KL divergence (natural log) of each member distribution from the
/// member-wise mean. Exactly zero when all distributions are identical.
pub fn dist_pv<T: Scalar>(distributions: &[Vec<T>]) -> Result<T> {
    let n = distributions.len();
    if n < 2 {
        return Err(Error::Usage(format!("dist_pv needs >= 2 distributions, got {n}")));
    }
    let classes = distributions[0].len();
    let tol = c::<T>(1e-9).max(T::epsilon() * c::<T>(32.0));
    for d in distributions {
        if d.len() != classes {
            return Err(Error::Input("distributions have mixed lengths".to_owned()));
        }
        let sum: T = d.iter().cloned().sum();
        if (sum - T::one()).abs() > tol || d.iter().any(|p| *p < T::zero()) {
            return Err(Error::Input(format!("distribution does not sum to 1 (sum {sum})")));
        }
    }
    if distributions.iter().all(|d| *d == distributions[0]) {
        return Ok(T::zero());
    }

    let count = T::from_usize(n).unwrap();
    let mut mean = vec![T::zero(); classes];
    for d in distributions {
        for (m, p) in mean.iter_mut().zip(d) {
            *m += *p;
        }
    }
    for m in &mut mean {
        *m /= count;
    }

    let mut total = T::zero();
    for d in distributions {
        for (p, q) in d.iter().zip(&mean) {
            if *p > T::zero() {
                // The mean dominates every member, so q > 0 whenever p > 0.
                assert!(*q > T::zero(), "mean distribution lost mass present in a member");
                total += *p * (*p / *q).ln();
            }
        }
    }
    // the sum is non-negative in exact arithmetic; rounding can graze below
    Ok(total.max(T::zero()))
}

/// Mean prediction of one example across members.
#[derive(Debug, Clone, PartialEq)]
pub enum MeanPrediction<T> {
    Value(T),
    Distribution(Vec<T>),
}

/// Per-example variation ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct PvRow<T> {
    pub row_id: u64,
    pub pv: T,
    pub mean_prediction: MeanPrediction<T>,
    /// `pv / |mean prediction|`; value tasks only, and only when the mean is
    /// nonzero.
    pub pv_coefficient: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PvTable<T> {
    pub rows: Vec<PvRow<T>>,
}

impl<T: Scalar> PvTable<T> {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn pvs(&self) -> Vec<T> {
        self.rows.iter().map(|r| r.pv).collect()
    }

    pub fn row_ids(&self) -> Vec<u64> {
        self.rows.iter().map(|r| r.row_id).collect()
    }

    pub fn mean_pv(&self) -> T {
        let n = T::from_usize(self.rows.len()).unwrap();
        self.rows.iter().map(|r| r.pv).sum::<T>() / n
    }

    pub fn std_pv(&self) -> T {
        let n = self.rows.len();
        if n < 2 {
            return T::zero();
        }
        let mean = self.mean_pv();
        let ss: T = self
            .rows
            .iter()
            .map(|r| {
                let d = r.pv - mean;
                d * d
            })
            .sum();
        (ss / T::from_usize(n - 1).unwrap()).sqrt()
    }

    /// Mean of the per-example PV coefficients (value tasks).
    pub fn mean_coefficient(&self) -> Option<T> {
        let coeffs: Vec<T> = self.rows.iter().filter_map(|r| r.pv_coefficient).collect();
        if coeffs.is_empty() {
            return None;
        }
        Some(coeffs.iter().cloned().sum::<T>() / T::from_usize(coeffs.len()).unwrap())
    }

    /// Restrict to the given row ids, in the table's order.
    pub fn select(&self, keep: &std::collections::HashSet<u64>) -> PvTable<T> {
        PvTable {
            rows: self
                .rows
                .iter()
                .filter(|r| keep.contains(&r.row_id))
                .cloned()
                .collect(),
        }
    }
}

/// Per-example prediction variation for a whole matrix.
pub fn pv_table<T: Scalar>(matrix: &PredictionMatrix<T>) -> Result<PvTable<T>> {
    if matrix.n_examples() == 0 {
        return Err(Error::Usage("pv_table of an empty matrix".to_owned()));
    }
    match matrix {
        PredictionMatrix::Value { row_ids, rows } => {
            let n = T::from_usize(rows.len()).unwrap();
            let mut out = Vec::with_capacity(row_ids.len());
            for (j, &row_id) in row_ids.iter().enumerate() {
                let column: Vec<T> = rows.iter().map(|r| r[j]).collect();
                let pv = value_pv(&column)
                    .map_err(|e| Error::Input(format!("row_id {row_id}: {e}")))?;
                let mean = column.iter().cloned().sum::<T>() / n;
                let coeff = (mean != T::zero()).then(|| pv / mean.abs());
                out.push(PvRow {
                    row_id,
                    pv,
                    mean_prediction: MeanPrediction::Value(mean),
                    pv_coefficient: coeff,
                });
            }
            Ok(PvTable { rows: out })
        }
        PredictionMatrix::Distribution { row_ids, classes, rows } => {
            let n = T::from_usize(rows.len()).unwrap();
            let mut out = Vec::with_capacity(row_ids.len());
            for (j, &row_id) in row_ids.iter().enumerate() {
                let column: Vec<Vec<T>> = rows.iter().map(|r| r[j].clone()).collect();
                let pv = dist_pv(&column)
                    .map_err(|e| Error::Input(format!("row_id {row_id}: {e}")))?;
                let mut mean = vec![T::zero(); *classes];
                for d in &column {
                    for (m, p) in mean.iter_mut().zip(d) {
                        *m += *p;
                    }
                }
                for m in &mut mean {
                    *m /= n;
                }
                out.push(PvRow {
                    row_id,
                    pv,
                    mean_prediction: MeanPrediction::Distribution(mean),
                    pv_coefficient: None,
                });
            }
            Ok(PvTable { rows: out })
        }
    }
}

/// Product-moment correlation. Errors when either vector has zero variance.
pub fn pearson<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::Input(format!(
            "pearson over mismatched lengths {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::Usage("pearson needs >= 2 points".to_owned()));
    }
    let n = T::from_usize(a.len()).unwrap();
    let mean_a = a.iter().cloned().sum::<T>() / n;
    let mean_b = b.iter().cloned().sum::<T>() / n;
    let mut cov = T::zero();
    let mut var_a = T::zero();
    let mut var_b = T::zero();
    for (&x, &y) in a.iter().zip(b) {
        let dx = x - mean_a;
        let dy = y - mean_b;
        cov += dx * dy;
        var_a += dx * dx;
        var_b += dy * dy;
    }
    if var_a == T::zero() || var_b == T::zero() {
        return Err(Error::Numeric(
            "correlation undefined for a zero-variance vector".to_owned(),
        ));
    }
    Ok(cov / (var_a.sqrt() * var_b.sqrt()))
}

/// Percentile bucket scheme over training variation values. Labels run
/// 1..=K, 1 being the lowest-variation bucket.
#[derive(Debug, Clone, PartialEq)]
pub struct BucketScheme<T> {
    pub k: usize,
    /// K-1 strictly ascending upper thresholds (nearest-rank percentiles of
    /// the training values at i*(100/K), i = 1..K-1).
    pub thresholds: Vec<T>,
}

/// Build a K-bucket scheme from training variation values using
/// nearest-rank percentiles. Duplicate thresholds (heavily tied inputs)
/// collapse, shrinking the effective bucket count; fewer distinct values
/// than K is an error.
pub fn bucketize<T: Scalar>(train_pvs: &[T], k: usize) -> Result<BucketScheme<T>> {
    if train_pvs.is_empty() {
        return Err(Error::Usage("bucketize needs training values".to_owned()));
    }
    if k < 2 {
        return Err(Error::Config(format!("bucket count must be >= 2, got {k}")));
    }
    if train_pvs.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("non-finite variation value".to_owned()));
    }
    let mut sorted = train_pvs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values compare"));
    let mut distinct = 1usize;
    for w in sorted.windows(2) {
        if w[1] != w[0] {
            distinct += 1;
        }
    }
    if k > distinct {
        return Err(Error::Config(format!(
            "cannot form {k} buckets from {distinct} distinct values"
        )));
    }

    let n = sorted.len();
    let mut thresholds: Vec<T> = Vec::with_capacity(k - 1);
    for i in 1..k {
        let pct = i as f64 * 100.0 / k as f64;
        // nearest-rank: smallest value with at least pct% of mass at or below
        let rank = ((pct / 100.0) * n as f64).ceil() as usize;
        let value = sorted[rank.clamp(1, n) - 1];
        if thresholds.last() != Some(&value) {
            thresholds.push(value);
        }
    }
    Ok(BucketScheme { k: thresholds.len() + 1, thresholds })
}

impl<T: Scalar> BucketScheme<T> {
    /// 1-based bucket label: the lowest bucket whose upper threshold is at
    /// least `pv` (values equal to a threshold fall in the lower bucket).
    pub fn assign(&self, pv: T) -> usize {
        1 + self.thresholds.iter().filter(|t| **t < pv).count()
    }
}

/// Ratio of the mean absolute per-example PV difference to the mean
/// ground-truth PV.
pub fn delta_ratio<T: Scalar>(pv_sub: &PvTable<T>, pv_gt: &PvTable<T>) -> Result<T> {
    if pv_sub.row_ids() != pv_gt.row_ids() {
        return Err(Error::Input("delta_ratio row ids do not align".to_owned()));
    }
    let n = T::from_usize(pv_gt.len()).unwrap();
    let mean_gt = pv_gt.mean_pv();
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
    if !(mean_gt > T::zero()) {
        return Err(Error::Input("ground-truth mean PV must be positive".to_owned()));
    }
    let mean_delta = pv_sub
        .rows
        .iter()
        .zip(&pv_gt.rows)
        .map(|(a, b)| (a.pv - b.pv).abs())
        .sum::<T>()
        / n;
    Ok(mean_delta / mean_gt)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SizeSweepPoint<T> {
    pub size: usize,
    pub mean_delta_ratio: T,
    pub std_delta_ratio: T,
}

/// For each candidate ensemble size, repeatedly sample that many members
/// (without replacement) from the universe matrix and measure the delta
/// ratio against the full-universe PV.
pub fn size_sweep<T: Scalar>(
    universe: &PredictionMatrix<T>,
    sizes: &[usize],
    resamples: usize,
    seed: u64,
) -> Result<Vec<SizeSweepPoint<T>>> {
    let n_universe = universe.n_members();
    if resamples == 0 {
        return Err(Error::Config("size_sweep needs resamples >= 1".to_owned()));
    }
    for &s in sizes {
        if s < 2 || s > n_universe {
            return Err(Error::Config(format!(
                "sweep size {s} invalid for a {n_universe}-member universe"
            )));
        }
    }
    let pv_gt = pv_table(universe)?;

    let mut points = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let mut ratios: Vec<T> = Vec::with_capacity(resamples);
        for rep in 0..resamples {
            let mut stream = Stream::new(seed, &format!("size-sweep/size/{size}/rep/{rep}"));
            let mut chosen = stream.sample_without_replacement(n_universe, size);
            // member order is irrelevant to the variation; sorting keeps the
            // full-universe draw bit-identical to the ground truth
            chosen.sort_unstable();
            let sub = select_members(universe, &chosen);
            let pv_sub = pv_table(&sub)?;
            ratios.push(delta_ratio(&pv_sub, &pv_gt)?);
        }
        let count = T::from_usize(resamples).unwrap();
        let mean = ratios.iter().cloned().sum::<T>() / count;
        let std = if resamples > 1 {
            let ss: T = ratios
                .iter()
                .map(|&r| {
                    let d = r - mean;
                    d * d
                })
                .sum();
            (ss / (count - T::one())).sqrt()
        } else {
            T::zero()
        };
        points.push(SizeSweepPoint {
            size,
            mean_delta_ratio: mean,
            std_delta_ratio: std,
        });
    }
    Ok(points)
}

fn select_members<T: Scalar>(matrix: &PredictionMatrix<T>, members: &[usize]) -> PredictionMatrix<T> {
    match matrix {
        PredictionMatrix::Value { row_ids, rows } => PredictionMatrix::Value {
            row_ids: row_ids.clone(),
            rows: members.iter().map(|&m| rows[m].clone()).collect(),
        },
        PredictionMatrix::Distribution { row_ids, classes, rows } => {
            PredictionMatrix::Distribution {
                row_ids: row_ids.clone(),
                classes: *classes,
                rows: members.iter().map(|&m| rows[m].clone()).collect(),
            }
        }
    }
}
