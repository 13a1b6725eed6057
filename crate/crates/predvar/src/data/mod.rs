//! Datasets: schema, examples, deterministic splitting, epoch shuffling and
//! delete-1 jackknife sub-sampling.
//!
//! A [`Dataset`] is an ordered list of rows; the order is part of its identity
//! and every operation here is a pure function of its explicit seed arguments.

mod epoch_order;
pub mod movielens;
pub mod synthetic;

pub use epoch_order::epoch_order;

use crate::error::{Error, Result};
use crate::rng::{hash64, Stream};
use crate::scalar::Scalar;

/// What the model predicts and how labels are encoded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    Regression,
    Binary,
    /// Multi-class classification over the given number of classes.
    Multiclass(usize),
}

impl TaskKind {
    pub fn code(&self) -> String {
        match self {
            TaskKind::Regression => "regression".to_owned(),
            TaskKind::Binary => "binary".to_owned(),
            TaskKind::Multiclass(c) => format!("multiclass:{c}"),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "regression" => Ok(TaskKind::Regression),
            "binary" => Ok(TaskKind::Binary),
            _ => match s.strip_prefix("multiclass:") {
                Some(c) => Ok(TaskKind::Multiclass(c.parse().map_err(|_| {
                    Error::Config(format!("bad multiclass class count in {s:?}"))
                })?)),
                None => Err(Error::Config(format!("unknown task kind {s:?}"))),
            },
        }
    }
}

/// Label of one example.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Label<T> {
    /// Regression target or binary 0/1 target.
    Value(T),
    /// Class index for multi-class tasks.
    Class(usize),
}

impl<T: Scalar> Label<T> {
    pub fn as_value(&self) -> Option<T> {
        match self {
            Label::Value(v) => Some(*v),
            Label::Class(_) => None,
        }
    }

    pub fn as_class(&self) -> Option<usize> {
        match self {
            Label::Class(c) => Some(*c),
            Label::Value(_) => None,
        }
    }
}

/// One categorical feature: a dense id space of size `vocab`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoricalFeature {
    pub name: String,
    pub vocab: usize,
}

/// Schema shared by all rows of a dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSchema {
    pub categorical: Vec<CategoricalFeature>,
    pub numeric: usize,
    pub task: TaskKind,
}

impl FeatureSchema {
    pub fn validate(&self) -> Result<()> {
        for f in &self.categorical {
            if f.vocab == 0 {
                return Err(Error::Config(format!(
                    "categorical feature {:?} has vocab size 0",
                    f.name
                )));
            }
        }
        if let TaskKind::Multiclass(c) = self.task {
            if c < 2 {
                return Err(Error::Config(format!("multiclass needs >= 2 classes, got {c}")));
            }
        }
        Ok(())
    }
}

/// One data row. Categorical ids are aligned with `schema.categorical`.
#[derive(Debug, Clone, PartialEq)]
pub struct Example<T> {
    pub row_id: u64,
    pub categorical: Vec<usize>,
    pub numeric: Vec<T>,
    pub label: Label<T>,
}

/// Where a dataset came from; recorded for reproducibility audits.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Provenance {
    pub source: String,
    pub split_name: String,
    pub parent_seed: Option<u64>,
}

/// Ordered, schema-conformant collection of examples.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    pub schema: FeatureSchema,
    pub rows: Vec<Example<T>>,
    pub provenance: Provenance,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(schema: FeatureSchema, rows: Vec<Example<T>>, provenance: Provenance) -> Result<Self> {
        let ds = Dataset {
            schema,
            rows,
            provenance,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Check every row against the schema: id ranges, vector lengths, label
    /// range, and row_id uniqueness.
    pub fn validate(&self) -> Result<()> {
        self.schema.validate()?;
        let mut seen = std::collections::HashSet::with_capacity(self.rows.len());
        for ex in &self.rows {
            if !seen.insert(ex.row_id) {
                return Err(Error::Input(format!("duplicate row_id {}", ex.row_id)));
            }
            if ex.categorical.len() != self.schema.categorical.len() {
                return Err(Error::Input(format!(
                    "row {}: expected {} categorical ids, got {}",
                    ex.row_id,
                    self.schema.categorical.len(),
                    ex.categorical.len()
                )));
            }
            for (id, feat) in ex.categorical.iter().zip(&self.schema.categorical) {
                if *id >= feat.vocab {
                    return Err(Error::Input(format!(
                        "row {}: id {} out of range for feature {:?} (vocab {})",
                        ex.row_id, id, feat.name, feat.vocab
                    )));
                }
            }
            if ex.numeric.len() != self.schema.numeric {
                return Err(Error::Input(format!(
                    "row {}: expected {} numeric values, got {}",
                    ex.row_id,
                    self.schema.numeric,
                    ex.numeric.len()
                )));
            }
            validate_label(&ex.label, self.schema.task).map_err(|e| {
                Error::Input(format!("row {}: {e}", ex.row_id))
            })?;
        }
        Ok(())
    }

    /// Reinterpret rating labels for the multi-class task: value `r` in
    /// `{1..C}` becomes class index `r - 1`. Other conversions keep labels.
    pub fn to_task(&self, task: TaskKind) -> Result<Dataset<T>> {
        let mut out = self.clone();
        out.schema.task = task;
        if let TaskKind::Multiclass(classes) = task {
            for ex in &mut out.rows {
                let v = ex.label.as_value().ok_or_else(|| {
                    Error::Input(format!("row {}: label is not a value", ex.row_id))
                })?;
                let r = v.to_f64().unwrap_or(f64::NAN);
                if r.fract() != 0.0 || r < 1.0 || r > classes as f64 {
                    return Err(Error::Input(format!(
                        "row {}: rating {r} not an integer in 1..={classes}",
                        ex.row_id
                    )));
                }
                ex.label = Label::Class(r as usize - 1);
            }
        }
        out.validate()?;
        Ok(out)
    }

    pub fn row_ids(&self) -> Vec<u64> {
        self.rows.iter().map(|r| r.row_id).collect()
    }
}

fn validate_label<T: Scalar>(label: &Label<T>, task: TaskKind) -> Result<()> {
    match (task, label) {
        (TaskKind::Regression, Label::Value(v)) => {
            if !v.is_finite() {
                return Err(Error::Input(format!("non-finite regression label {v}")));
            }
            Ok(())
        }
        (TaskKind::Binary, Label::Value(v)) => {
            if *v != T::zero() && *v != T::one() {
                return Err(Error::Input(format!("binary label must be 0 or 1, got {v}")));
            }
            Ok(())
        }
        (TaskKind::Multiclass(c), Label::Class(k)) => {
            if *k >= c {
                return Err(Error::Input(format!("class index {k} out of range for {c} classes")));
            }
            Ok(())
        }
        _ => Err(Error::Input("label kind does not match task kind".to_owned())),
    }
}

/// Split a dataset into parts by a seeded permutation followed by contiguous
/// cuts. Fractions must be positive and sum to 1.
pub fn split<T: Scalar>(dataset: &Dataset<T>, fractions: &[f64], seed: u64) -> Result<Vec<Dataset<T>>> {
    if fractions.is_empty() {
        return Err(Error::Config("split needs at least one fraction".to_owned()));
    }
    if fractions.iter().any(|f| *f <= 0.0) {
        return Err(Error::Config("split fractions must be positive".to_owned()));
    }
    let total: f64 = fractions.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!("split fractions sum to {total}, expected 1")));
    }

    let n = dataset.len();
    let perm = Stream::new(seed, "split").permutation(n);

    // Cut points from rounded cumulative fractions; the last cut is pinned to n.
    let mut cuts = Vec::with_capacity(fractions.len() + 1);
    cuts.push(0usize);
    let mut acc = 0.0;
    for (i, f) in fractions.iter().enumerate() {
        acc += f;
        let cut = if i + 1 == fractions.len() {
            n
        } else {
            (acc * n as f64).round() as usize
        };
        cuts.push(cut.max(cuts[i]));
    }

    let mut parts = Vec::with_capacity(fractions.len());
    for (i, w) in cuts.windows(2).enumerate() {
        let rows: Vec<Example<T>> = perm[w[0]..w[1]]
            .iter()
            .map(|&ix| dataset.rows[ix].clone())
            .collect();
        parts.push(Dataset {
            schema: dataset.schema.clone(),
            rows,
            provenance: Provenance {
                source: dataset.provenance.source.clone(),
                split_name: format!("part{i}"),
                parent_seed: Some(seed),
            },
        });
    }
    Ok(parts)
}

/// Permutation of `[0, dataset_size)` for one training epoch, keyed by
/// `(base_seed, epoch_index)`.
pub fn shuffle_epoch(dataset_size: usize, base_seed: u64, epoch_index: usize) -> Vec<usize> {
    assert!(dataset_size > 0, "shuffle_epoch of empty dataset");
    Stream::new(base_seed, &format!("shuffle/epoch/{epoch_index}")).permutation(dataset_size)
}

/// Jackknife fold assignment seed. Folds are a function of row ids alone so
/// they stay frozen under re-ingestion of the same data.
const JACKKNIFE_FOLD_SEED: u64 = 0x6a61636b_6b6e6966; // "jackknif"

fn jackknife_fold_ranks<T: Scalar>(dataset: &Dataset<T>) -> Vec<usize> {
    // Rank rows by a seeded hash of row_id (ties broken by row_id), then
    // assign fold = rank mod K. Ranks are computed once; fold K just takes
    // rank % K, giving exactly near-equal folds.
    let mut keyed: Vec<(u64, u64, usize)> = dataset
        .rows
        .iter()
        .enumerate()
        .map(|(pos, ex)| {
            let mut bytes = Vec::with_capacity(16);
            bytes.extend_from_slice(&JACKKNIFE_FOLD_SEED.to_le_bytes());
            bytes.extend_from_slice(&ex.row_id.to_le_bytes());
            (hash64(&bytes), ex.row_id, pos)
        })
        .collect();
    keyed.sort_unstable();
    let mut rank_of_pos = vec![0usize; dataset.len()];
    for (rank, (_, _, pos)) in keyed.into_iter().enumerate() {
        rank_of_pos[pos] = rank;
    }
    rank_of_pos
}

/// Fold index (in `[0, k)`) of every row, in row order.
pub fn jackknife_folds<T: Scalar>(dataset: &Dataset<T>, k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > dataset.len() {
        return Err(Error::Config(format!(
            "jackknife fold count {k} invalid for dataset of {} rows",
            dataset.len()
        )));
    }
    Ok(jackknife_fold_ranks(dataset).into_iter().map(|r| r % k).collect())
}

/// Delete-1 jackknife: all rows except those in fold `leave_out_index`,
/// preserving original relative order.
pub fn jackknife_subsample<T: Scalar>(
    dataset: &Dataset<T>,
    k: usize,
    leave_out_index: usize,
) -> Result<Dataset<T>> {
    if leave_out_index >= k {
        return Err(Error::Config(format!(
            "leave_out_index {leave_out_index} out of range for {k} folds"
        )));
    }
    let folds = jackknife_folds(dataset, k)?;
    let rows: Vec<Example<T>> = dataset
        .rows
        .iter()
        .zip(&folds)
        .filter(|(_, fold)| **fold != leave_out_index)
        .map(|(ex, _)| ex.clone())
        .collect();
    Ok(Dataset {
        schema: dataset.schema.clone(),
        rows,
        provenance: Provenance {
            source: dataset.provenance.source.clone(),
            split_name: format!("{}/jackknife{leave_out_index}of{k}", dataset.provenance.split_name),
            parent_seed: dataset.provenance.parent_seed,
        },
    })
}
