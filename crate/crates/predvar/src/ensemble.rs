//! Ensembles under explicitly controlled randomness sources.
//!
//! Three sources can be toggled independently: epoch shuffling of the
//! training data (S), random parameter initialization (R), and delete-1
//! jackknife sub-sampling (J). The eight on/off combinations are labelled
//! R0..R7; with every source off (R0) all members train identically and
//! downstream prediction variation is exactly zero.

use rayon::prelude::*;

use crate::data::{jackknife_subsample, Dataset, TaskKind};
use crate::error::{Error, Result};
use crate::nn::train::{train, TrainConfig, TrainSeeds, TrainingHistory};
use crate::nn::{forward, ModelParams, ModelSpec};
use crate::rng::Stream;
use crate::scalar::Scalar;

/// Initialization seed shared by every member when random initialization is
/// off. Deliberately not part of any derived seed set.
pub const FIXED_GLOBAL_INIT_SEED: u64 = 42;

/// Which randomness sources are live.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RandomnessSetting {
    pub shuffle: bool,
    pub rand_init: bool,
    pub jackknife: bool,
}

impl RandomnessSetting {
    /// Settings in code order R0..R7.
    pub const ALL: [RandomnessSetting; 8] = [
        RandomnessSetting { rand_init: false, shuffle: false, jackknife: false }, // R0
        RandomnessSetting { rand_init: true, shuffle: false, jackknife: false },  // R1
        RandomnessSetting { rand_init: false, shuffle: true, jackknife: false },  // R2
        RandomnessSetting { rand_init: true, shuffle: true, jackknife: false },   // R3
        RandomnessSetting { rand_init: false, shuffle: false, jackknife: true },  // R4
        RandomnessSetting { rand_init: true, shuffle: false, jackknife: true },   // R5
        RandomnessSetting { rand_init: false, shuffle: true, jackknife: true },   // R6
        RandomnessSetting { rand_init: true, shuffle: true, jackknife: true },    // R7
    ];

    /// Code index: R=1, S=2, J=4.
    pub fn code_index(&self) -> usize {
        usize::from(self.rand_init) + 2 * usize::from(self.shuffle) + 4 * usize::from(self.jackknife)
    }

    pub fn code(&self) -> String {
        format!("R{}", self.code_index())
    }

    pub fn parse(s: &str) -> Result<Self> {
        let trimmed = s.trim();
        let ix: usize = trimmed
            .strip_prefix('R')
            .or_else(|| trimmed.strip_prefix('r'))
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| Error::Config(format!("unknown randomness setting {s:?}")))?;
        if ix > 7 {
            return Err(Error::Config(format!("randomness setting {s:?} out of range R0..R7")));
        }
        Ok(Self::ALL[ix])
    }
}

impl std::fmt::Display for RandomnessSetting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.code())
    }
}

/// The exact seeds realizing one member's training randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedBundle {
    pub init_seed: u64,
    pub shuffle_seed: Option<u64>,
    pub jackknife_index: Option<usize>,
}

/// Derive the per-member seed bundles for a setting.
///
/// With R on, the member init seeds form a fixed recorded set derived only
/// from `(master_seed, member index)`, so settings sharing R under the same
/// master seed reuse the identical set. With R off every member uses
/// [`FIXED_GLOBAL_INIT_SEED`].
pub fn make_seed_bundles(
    setting: RandomnessSetting,
    n: usize,
    master_seed: u64,
) -> Vec<SeedBundle> {
    let mut init_seeds: Vec<u64> = Vec::with_capacity(n);
    if setting.rand_init {
        let mut stream = Stream::new(master_seed, "member-init-seeds");
        let mut seen = std::collections::HashSet::with_capacity(n);
        while init_seeds.len() < n {
            let s = stream.next_u64();
            if seen.insert(s) {
                init_seeds.push(s);
            }
        }
    } else {
        init_seeds.resize(n, FIXED_GLOBAL_INIT_SEED);
    }

    let shuffle_seeds: Vec<Option<u64>> = if setting.shuffle {
        let mut stream = Stream::new(master_seed, "member-shuffle-seeds");
        (0..n).map(|_| Some(stream.next_u64())).collect()
    } else {
        vec![None; n]
    };

    (0..n)
        .map(|i| SeedBundle {
            init_seed: init_seeds[i],
            shuffle_seed: shuffle_seeds[i],
            jackknife_index: setting.jackknife.then_some(i),
        })
        .collect()
}

/// One trained member.
#[derive(Debug, Clone)]
pub struct Member<T> {
    pub bundle: SeedBundle,
    pub params: ModelParams<T>,
    pub history: TrainingHistory,
}

/// A trained ensemble plus everything needed to retrain any member.
#[derive(Debug, Clone)]
pub struct Ensemble<T> {
    pub spec: ModelSpec<T>,
    pub config: TrainConfig,
    pub setting: RandomnessSetting,
    pub master_seed: u64,
    pub members: Vec<Member<T>>,
}

impl<T: Scalar> Ensemble<T> {
    pub fn n(&self) -> usize {
        self.members.len()
    }
}

/// Train an `n`-member ensemble under `setting`. Members are independent;
/// the result is invariant to `workers` (each member's arithmetic is
/// single-threaded and members are collected in index order).
pub fn train_ensemble<T: Scalar>(
    spec: &ModelSpec<T>,
    config: &TrainConfig,
    train_data: &Dataset<T>,
    setting: RandomnessSetting,
    n: usize,
    master_seed: u64,
    workers: usize,
) -> Result<Ensemble<T>> {
    if n < 2 {
        return Err(Error::Usage(format!("ensemble needs at least 2 members, got {n}")));
    }
    if setting.jackknife && n > train_data.len() {
        return Err(Error::Config(format!(
            "jackknife with {n} folds does not fit {} rows",
            train_data.len()
        )));
    }
    let bundles = make_seed_bundles(setting, n, master_seed);

    let train_member = |(i, bundle): (usize, &SeedBundle)| -> Result<Member<T>> {
        let member_data;
        let data_ref = match bundle.jackknife_index {
            Some(fold) => {
                member_data = jackknife_subsample(train_data, n, fold)?;
                &member_data
            }
            None => train_data,
        };
        let seeds = TrainSeeds {
            init: bundle.init_seed,
            shuffle: bundle.shuffle_seed,
            dropout: None,
        };
        let (params, history) = train(spec, config, data_ref, &seeds).map_err(|e| e.with_member(i))?;
        Ok(Member {
            bundle: *bundle,
            params,
            history,
        })
    };

    let members: Result<Vec<Member<T>>> = if workers <= 1 {
        bundles.iter().enumerate().map(train_member).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
        pool.install(|| bundles.par_iter().enumerate().map(train_member).collect())
    };

    Ok(Ensemble {
        spec: spec.clone(),
        config: config.clone(),
        setting,
        master_seed,
        members: members?,
    })
}

/// Per-(member, example) predictions, aligned to a dataset's row ids.
#[derive(Debug, Clone, PartialEq)]
pub enum PredictionMatrix<T> {
    /// Regression values or binary probabilities, `[n_members][n_examples]`.
    Value {
        row_ids: Vec<u64>,
        rows: Vec<Vec<T>>,
    },
    /// Multi-class distributions, `[n_members][n_examples][classes]`.
    Distribution {
        row_ids: Vec<u64>,
        classes: usize,
        rows: Vec<Vec<Vec<T>>>,
    },
}

impl<T: Scalar> PredictionMatrix<T> {
    pub fn n_members(&self) -> usize {
        match self {
            PredictionMatrix::Value { rows, .. } => rows.len(),
            PredictionMatrix::Distribution { rows, .. } => rows.len(),
        }
    }

    pub fn n_examples(&self) -> usize {
        match self {
            PredictionMatrix::Value { row_ids, .. } => row_ids.len(),
            PredictionMatrix::Distribution { row_ids, .. } => row_ids.len(),
        }
    }

    pub fn row_ids(&self) -> &[u64] {
        match self {
            PredictionMatrix::Value { row_ids, .. } => row_ids,
            PredictionMatrix::Distribution { row_ids, .. } => row_ids,
        }
    }

    /// Keep only the first `n` member rows (members are index-aligned with
    /// their seed derivation, so a prefix is itself a valid smaller ensemble).
    pub fn take_members(&self, n: usize) -> Result<PredictionMatrix<T>> {
        if n > self.n_members() {
            return Err(Error::Config(format!(
                "cannot take {n} members from a {}-member matrix",
                self.n_members()
            )));
        }
        Ok(match self {
            PredictionMatrix::Value { row_ids, rows } => PredictionMatrix::Value {
                row_ids: row_ids.clone(),
                rows: rows[..n].to_vec(),
            },
            PredictionMatrix::Distribution { row_ids, classes, rows } => {
                PredictionMatrix::Distribution {
                    row_ids: row_ids.clone(),
                    classes: *classes,
                    rows: rows[..n].to_vec(),
                }
            }
        })
    }

    /// Select example columns by member-of row_id set, preserving order.
    pub fn select_rows(&self, keep: &std::collections::HashSet<u64>) -> PredictionMatrix<T> {
        let keep_ix: Vec<usize> = self
            .row_ids()
            .iter()
            .enumerate()
            .filter(|(_, id)| keep.contains(id))
            .map(|(i, _)| i)
            .collect();
        match self {
            PredictionMatrix::Value { row_ids, rows } => PredictionMatrix::Value {
                row_ids: keep_ix.iter().map(|&i| row_ids[i]).collect(),
                rows: rows
                    .iter()
                    .map(|r| keep_ix.iter().map(|&i| r[i]).collect())
                    .collect(),
            },
            PredictionMatrix::Distribution { row_ids, classes, rows } => {
                PredictionMatrix::Distribution {
                    row_ids: keep_ix.iter().map(|&i| row_ids[i]).collect(),
                    classes: *classes,
                    rows: rows
                        .iter()
                        .map(|r| keep_ix.iter().map(|&i| r[i].clone()).collect())
                        .collect(),
                }
            }
        }
    }
}

/// Run every member over `examples` (no activation capture; probing a single
/// model is a separate concern).
pub fn predict_matrix<T: Scalar>(
    ensemble: &Ensemble<T>,
    examples: &Dataset<T>,
) -> Result<PredictionMatrix<T>> {
    ensemble.spec.check_schema(&examples.schema)?;
    let row_ids = examples.row_ids();
    match ensemble.spec.task {
        TaskKind::Multiclass(classes) => {
            let mut rows = Vec::with_capacity(ensemble.n());
            for member in &ensemble.members {
                let mut row = Vec::with_capacity(examples.len());
                for ex in &examples.rows {
                    let (pred, _) = forward(&ensemble.spec, &member.params, ex, false)?;
                    row.push(pred.as_distribution().expect("multiclass prediction").to_vec());
                }
                rows.push(row);
            }
            Ok(PredictionMatrix::Distribution {
                row_ids,
                classes,
                rows,
            })
        }
        _ => {
            let mut rows = Vec::with_capacity(ensemble.n());
            for member in &ensemble.members {
                let mut row = Vec::with_capacity(examples.len());
                for ex in &examples.rows {
                    let (pred, _) = forward(&ensemble.spec, &member.params, ex, false)?;
                    row.push(pred.as_scalar().expect("value prediction"));
                }
                rows.push(row);
            }
            Ok(PredictionMatrix::Value { row_ids, rows })
        }
    }
}

/// Member-wise mean predictions (ensemble point estimate), example-aligned.
pub fn mean_predictions<T: Scalar>(matrix: &PredictionMatrix<T>) -> Vec<crate::nn::Prediction<T>> {
    match matrix {
        PredictionMatrix::Value { rows, row_ids } => {
            let n = T::from_usize(rows.len()).unwrap();
            (0..row_ids.len())
                .map(|j| {
                    let sum: T = rows.iter().map(|r| r[j]).sum();
                    crate::nn::Prediction::Value(sum / n)
                })
                .collect()
        }
        PredictionMatrix::Distribution { rows, row_ids, classes } => {
            let n = T::from_usize(rows.len()).unwrap();
            (0..row_ids.len())
                .map(|j| {
                    let mut mean = vec![T::zero(); *classes];
                    for r in rows {
                        for (m, p) in mean.iter_mut().zip(&r[j]) {
                            *m += *p;
                        }
                    }
                    for m in &mut mean {
                        *m /= n;
                    }
                    crate::nn::Prediction::Distribution(mean)
                })
                .collect()
        }
    }
}
