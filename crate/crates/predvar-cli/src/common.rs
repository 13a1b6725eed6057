//! Shared CLI plumbing: task presets, data-directory conventions, and
//! manifest helpers.

use std::path::{Path, PathBuf};

use predvar::artifacts::{load_dataset, sha256_file};
use predvar::data::TaskKind;
use predvar::nn::train::TrainConfig;
use predvar::nn::ModelSpec;
use predvar::{DatasetF64, Error, ModelSpecF64, Result};

/// Built-in target tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskId {
    /// MovieLens rating regression.
    MlR,
    /// MovieLens 5-class rating classification.
    MlC,
    /// Synthetic binary click prediction.
    SynthBinary,
}

impl TaskId {
    pub fn parse(s: &str) -> Result<TaskId> {
        match s {
            "ml-r" => Ok(TaskId::MlR),
            "ml-c" => Ok(TaskId::MlC),
            "synth-binary" => Ok(TaskId::SynthBinary),
            other => Err(Error::Config(format!(
                "unknown task {other:?} (expected ml-r, ml-c, or synth-binary)"
            ))),
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            TaskId::MlR => "ml-r",
            TaskId::MlC => "ml-c",
            TaskId::SynthBinary => "synth-binary",
        }
    }

    /// Convert a canonical dump (ratings stored as values) to this task's
    /// label encoding.
    pub fn adapt(&self, data: DatasetF64) -> Result<DatasetF64> {
        match self {
            TaskId::MlC => data.to_task(TaskKind::Multiclass(5)),
            _ => Ok(data),
        }
    }

    pub fn model_spec(&self, schema: &predvar::data::FeatureSchema) -> Result<ModelSpecF64> {
        match self {
            TaskId::MlR => ModelSpec::movielens_regression(schema),
            TaskId::MlC => ModelSpec::movielens_multiclass(schema),
            TaskId::SynthBinary => ModelSpec::binary_mlp(schema),
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        match self {
            TaskId::MlR => TrainConfig::movielens(),
            TaskId::MlC => TrainConfig::movielens_multiclass(),
            TaskId::SynthBinary => TrainConfig::binary_one_epoch(),
        }
    }
}

/// Standard file names inside a prepared data directory.
pub mod files {
    pub const TRAIN: &str = "d_t.tsv";
    pub const TEST: &str = "d_e.tsv";
    pub const EST_TRAIN: &str = "d_e1.tsv";
    pub const EST_TEST: &str = "d_e2.tsv";
}

pub fn data_file(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

pub fn load_data(dir: &Path, name: &str) -> Result<DatasetF64> {
    load_dataset(&data_file(dir, name))
}

/// Ordered manifest builder.
#[derive(Debug, Default)]
pub struct Manifest {
    pairs: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(command: &str) -> Manifest {
        let mut m = Manifest::default();
        m.push("command", command);
        m
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.pairs.push((key.into(), value.to_string()));
    }

    /// Record a path plus its content hash.
    pub fn push_input(&mut self, key: &str, path: &Path) -> Result<()> {
        self.push(key, path.display());
        self.push(format!("{key}.sha256"), sha256_file(path)?);
        Ok(())
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    pub fn save(&self, path: &Path, kind: &str) -> Result<()> {
        predvar::artifacts::save_kv(path, kind, &self.pairs)
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))
}

/// Format an optional metric for reports; absent values stay visible.
pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "undefined".to_owned())
}
