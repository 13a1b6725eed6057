//! On-disk artifact formats: versioned, delimited text throughout.
//!
//! Scalars in bulk tables use Rust's shortest round-trip float formatting;
//! model parameters are stored as raw bit patterns in hex so artifact loads
//! are bit-exact. Files start with a `#predvar <kind> v1` line followed by
//! `#key=value` metadata.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::data::{CategoricalFeature, Dataset, Example, FeatureSchema, Label, Provenance, TaskKind};
use crate::ensemble::PredictionMatrix;
use crate::error::{Error, Result};
use crate::nn::train::TrainSeeds;
use crate::nn::{EmbeddingSpec, ModelParams, ModelSpec, ParamLayout};
use crate::probe::NeuronStats;
use crate::scalar::Scalar;
use crate::variation::{MeanPrediction, PvRow, PvTable, SizeSweepPoint};

fn open_err(path: &Path, e: std::io::Error) -> Error {
    Error::io(path.display().to_string(), e)
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

/// SHA-256 of a file, lowercase hex. Reports embed these for their inputs.
pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| open_err(path, e))?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

fn fmt_scalar<T: Scalar>(v: T) -> String {
    format!("{v}")
}

fn parse_scalar<T: Scalar>(s: &str, path: &Path, line: usize) -> Result<T> {
    let v: f64 = s
        .parse()
        .map_err(|_| parse_err(path, line, format!("bad number {s:?}")))?;
    Ok(T::from_f64_lossy(v))
}

struct HeaderReader {
    lines: Vec<String>,
    meta: HashMap<String, String>,
    /// Index of the first non-header line.
    body_start: usize,
}

fn read_with_header(path: &Path, kind: &str) -> Result<HeaderReader> {
    let file = std::fs::File::open(path).map_err(|e| open_err(path, e))?;
    let mut lines = Vec::new();
    for l in BufReader::new(file).lines() {
        lines.push(l.map_err(|e| open_err(path, e))?);
    }
    let expected = format!("#predvar {kind} v1");
    if lines.first().map(String::as_str) != Some(expected.as_str()) {
        return Err(parse_err(path, 1, format!("expected header {expected:?}")));
    }
    let mut meta = HashMap::new();
    let mut body_start = 1;
    for (i, line) in lines.iter().enumerate().skip(1) {
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.split_once('=') {
                meta.insert(k.trim().to_owned(), v.trim().to_owned());
            }
            body_start = i + 1;
        } else {
            break;
        }
    }
    Ok(HeaderReader {
        lines,
        meta,
        body_start,
    })
}

fn meta_required<'a>(h: &'a HeaderReader, path: &Path, key: &str) -> Result<&'a str> {
    h.meta
        .get(key)
        .map(String::as_str)
        .ok_or_else(|| parse_err(path, 1, format!("missing #{key}= header")))
}

// ---------------------------------------------------------------------------
// Dataset dumps
// ---------------------------------------------------------------------------

/// Canonical dataset dump: one record per row with row_id, categorical ids,
/// numeric vector, and label.
pub fn save_dataset<T: Scalar>(path: &Path, data: &Dataset<T>) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| open_err(path, e))?;
    let mut w = BufWriter::new(file);
    let cat = data
        .schema
        .categorical
        .iter()
        .map(|f| format!("{}:{}", f.name, f.vocab))
        .collect::<Vec<_>>()
        .join(",");
    let parent = data
        .provenance
        .parent_seed
        .map(|s| s.to_string())
        .unwrap_or_else(|| "none".to_owned());
    let mut out = String::new();
    out.push_str("#predvar dataset v1\n");
    out.push_str(&format!("#source={}\n", data.provenance.source));
    out.push_str(&format!("#split={}\n", data.provenance.split_name));
    out.push_str(&format!("#parent_seed={parent}\n"));
    out.push_str(&format!("#task={}\n", data.schema.task.code()));
    out.push_str(&format!("#categorical={cat}\n"));
    out.push_str(&format!("#numeric={}\n", data.schema.numeric));
    out.push_str("row_id\tcategorical\tnumeric\tlabel\n");
    w.write_all(out.as_bytes()).map_err(|e| open_err(path, e))?;

    for ex in &data.rows {
        let cats = ex
            .categorical
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let nums = ex
            .numeric
            .iter()
            .map(|v| fmt_scalar(*v))
            .collect::<Vec<_>>()
            .join(",");
        let label = match ex.label {
            Label::Value(v) => fmt_scalar(v),
            Label::Class(k) => format!("c{k}"),
        };
        writeln!(w, "{}\t{}\t{}\t{}", ex.row_id, cats, nums, label).map_err(|e| open_err(path, e))?;
    }
    w.flush().map_err(|e| open_err(path, e))
}

pub fn load_dataset<T: Scalar>(path: &Path) -> Result<Dataset<T>> {
    let h = read_with_header(path, "dataset")?;
    let task = TaskKind::parse(meta_required(&h, path, "task")?)?;
    let categorical: Vec<CategoricalFeature> = {
        let raw = meta_required(&h, path, "categorical")?;
        if raw.is_empty() {
            Vec::new()
        } else {
            raw.split(',')
                .map(|part| {
                    let (name, vocab) = part
                        .rsplit_once(':')
                        .ok_or_else(|| parse_err(path, 1, format!("bad categorical spec {part:?}")))?;
                    Ok(CategoricalFeature {
                        name: name.to_owned(),
                        vocab: vocab
                            .parse()
                            .map_err(|_| parse_err(path, 1, format!("bad vocab in {part:?}")))?,
                    })
                })
                .collect::<Result<_>>()?
        }
    };
    let numeric: usize = meta_required(&h, path, "numeric")?
        .parse()
        .map_err(|_| parse_err(path, 1, "bad #numeric= header"))?;
    let source = h.meta.get("source").cloned().unwrap_or_default();
    let split_name = h.meta.get("split").cloned().unwrap_or_default();
    let parent_seed = match h.meta.get("parent_seed").map(String::as_str) {
        None | Some("none") => None,
        Some(s) => Some(
            s.parse()
                .map_err(|_| parse_err(path, 1, "bad #parent_seed= header"))?,
        ),
    };

    let mut rows = Vec::new();
    for (i, line) in h.lines.iter().enumerate().skip(h.body_start) {
        let lineno = i + 1;
        if line.is_empty() || line.starts_with("row_id\t") {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(parse_err(path, lineno, "expected 4 tab-separated fields"));
        }
        let row_id: u64 = fields[0]
            .parse()
            .map_err(|_| parse_err(path, lineno, "bad row_id"))?;
        let categorical_ids: Vec<usize> = if fields[1].is_empty() {
            Vec::new()
        } else {
            fields[1]
                .split(',')
                .map(|c| c.parse().map_err(|_| parse_err(path, lineno, "bad categorical id")))
                .collect::<Result<_>>()?
        };
        let numeric_vals: Vec<T> = if fields[2].is_empty() {
            Vec::new()
        } else {
            fields[2]
                .split(',')
                .map(|v| parse_scalar(v, path, lineno))
                .collect::<Result<_>>()?
        };
        let label = match fields[3].strip_prefix('c') {
            Some(k) => Label::Class(
                k.parse()
                    .map_err(|_| parse_err(path, lineno, "bad class label"))?,
            ),
            None => Label::Value(parse_scalar(fields[3], path, lineno)?),
        };
        rows.push(Example {
            row_id,
            categorical: categorical_ids,
            numeric: numeric_vals,
            label,
        });
    }

    Dataset::new(
        FeatureSchema {
            categorical,
            numeric,
            task,
        },
        rows,
        Provenance {
            source,
            split_name,
            parent_seed,
        },
    )
}

// ---------------------------------------------------------------------------
// Model artifacts
// ---------------------------------------------------------------------------

/// A trained model together with its spec and training seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelArtifact<T> {
    pub spec: ModelSpec<T>,
    pub params: ModelParams<T>,
    pub seeds: TrainSeeds,
}

/// Versioned model dump; parameter values are hex bit patterns, so a load is
/// bit-exact.
pub fn save_model<T: Scalar>(path: &Path, artifact: &ModelArtifact<T>) -> Result<()> {
    let spec = &artifact.spec;
    let file = std::fs::File::create(path).map_err(|e| open_err(path, e))?;
    let mut w = BufWriter::new(file);
    let embeddings = spec
        .embeddings
        .iter()
        .map(|e| format!("{}:{}:{}", e.feature_name, e.vocab_size, e.embedding_dim))
        .collect::<Vec<_>>()
        .join(",");
    let clamp = match spec.output_clamp {
        Some((lo, hi)) => format!("{:016x},{:016x}", lo.to_bits_u64(), hi.to_bits_u64()),
        None => "none".to_owned(),
    };
    let opt = |v: Option<u64>| v.map(|s| s.to_string()).unwrap_or_else(|| "none".to_owned());
    write!(
        w,
        "#predvar model v1\n#task={}\n#temperature={:016x}\n#dropout_rate={:016x}\n#output_clamp={}\n#numeric_inputs={}\n#hidden_sizes={}\n#embeddings={}\n#seed_init={}\n#seed_shuffle={}\n#seed_dropout={}\n",
        spec.task.code(),
        spec.temperature.to_bits_u64(),
        spec.dropout_rate.to_bits_u64(),
        clamp,
        spec.numeric_inputs,
        spec.hidden_sizes.iter().map(|h| h.to_string()).collect::<Vec<_>>().join(","),
        embeddings,
        artifact.seeds.init,
        opt(artifact.seeds.shuffle),
        opt(artifact.seeds.dropout),
    )
    .map_err(|e| open_err(path, e))?;

    for (i, seg) in artifact.params.layout.segments.iter().enumerate() {
        writeln!(w, "segment\t{}\t{}\t{}", seg.name, seg.rows, seg.cols).map_err(|e| open_err(path, e))?;
        let values = artifact.params.segment(i);
        for row in values.chunks(seg.cols) {
            let line = row
                .iter()
                .map(|v| format!("{:016x}", v.to_bits_u64()))
                .collect::<Vec<_>>()
                .join(" ");
            writeln!(w, "{line}").map_err(|e| open_err(path, e))?;
        }
    }
    w.flush().map_err(|e| open_err(path, e))
}

pub fn load_model<T: Scalar>(path: &Path) -> Result<ModelArtifact<T>> {
    let h = read_with_header(path, "model")?;
    let task = TaskKind::parse(meta_required(&h, path, "task")?)?;
    let parse_bits = |key: &str| -> Result<T> {
        let raw = meta_required(&h, path, key)?;
        let bits = u64::from_str_radix(raw, 16)
            .map_err(|_| parse_err(path, 1, format!("bad hex in #{key}=")))?;
        Ok(T::from_bits_u64(bits))
    };
    let temperature = parse_bits("temperature")?;
    let dropout_rate = parse_bits("dropout_rate")?;
    let output_clamp = match meta_required(&h, path, "output_clamp")? {
        "none" => None,
        s => {
            let (lo, hi) = s
                .split_once(',')
                .ok_or_else(|| parse_err(path, 1, "bad #output_clamp="))?;
            let lo = u64::from_str_radix(lo, 16).map_err(|_| parse_err(path, 1, "bad clamp hex"))?;
            let hi = u64::from_str_radix(hi, 16).map_err(|_| parse_err(path, 1, "bad clamp hex"))?;
            Some((T::from_bits_u64(lo), T::from_bits_u64(hi)))
        }
    };
    let numeric_inputs: usize = meta_required(&h, path, "numeric_inputs")?
        .parse()
        .map_err(|_| parse_err(path, 1, "bad #numeric_inputs="))?;
    let hidden_sizes: Vec<usize> = meta_required(&h, path, "hidden_sizes")?
        .split(',')
        .map(|s| s.parse().map_err(|_| parse_err(path, 1, "bad #hidden_sizes=")))
        .collect::<Result<_>>()?;
    let embeddings: Vec<EmbeddingSpec> = {
        let raw = meta_required(&h, path, "embeddings")?;
        if raw.is_empty() {
            Vec::new()
        } else {
            raw.split(',')
                .map(|part| {
                    let bits: Vec<&str> = part.split(':').collect();
                    if bits.len() != 3 {
                        return Err(parse_err(path, 1, format!("bad embedding spec {part:?}")));
                    }
                    Ok(EmbeddingSpec {
                        feature_name: bits[0].to_owned(),
                        vocab_size: bits[1].parse().map_err(|_| parse_err(path, 1, "bad vocab"))?,
                        embedding_dim: bits[2].parse().map_err(|_| parse_err(path, 1, "bad dim"))?,
                    })
                })
                .collect::<Result<_>>()?
        }
    };
    let parse_seed = |key: &str| -> Result<Option<u64>> {
        match meta_required(&h, path, key)? {
            "none" => Ok(None),
            s => Ok(Some(
                s.parse().map_err(|_| parse_err(path, 1, format!("bad #{key}=")))?,
            )),
        }
    };
    let seeds = TrainSeeds {
        init: meta_required(&h, path, "seed_init")?
            .parse()
            .map_err(|_| parse_err(path, 1, "bad #seed_init="))?,
        shuffle: parse_seed("seed_shuffle")?,
        dropout: parse_seed("seed_dropout")?,
    };

    let spec = ModelSpec {
        task,
        embeddings,
        numeric_inputs,
        hidden_sizes,
        temperature,
        dropout_rate,
        output_clamp,
    };
    spec.validate()?;

    let layout = ParamLayout::from_spec(&spec);
    let mut values: Vec<T> = Vec::with_capacity(layout.total);
    let mut seg_iter = layout.segments.iter();
    let mut expect_rows = 0usize;
    for (i, line) in h.lines.iter().enumerate().skip(h.body_start) {
        let lineno = i + 1;
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("segment\t") {
            if expect_rows != 0 {
                return Err(parse_err(path, lineno, "segment ended early"));
            }
            let seg = seg_iter
                .next()
                .ok_or_else(|| parse_err(path, lineno, "more segments than the spec defines"))?;
            let fields: Vec<&str> = rest.split('\t').collect();
            if fields.len() != 3
                || fields[0] != seg.name
                || fields[1] != seg.rows.to_string()
                || fields[2] != seg.cols.to_string()
            {
                return Err(parse_err(
                    path,
                    lineno,
                    format!("segment mismatch: expected {} {}x{}", seg.name, seg.rows, seg.cols),
                ));
            }
            expect_rows = seg.rows;
        } else {
            if expect_rows == 0 {
                return Err(parse_err(path, lineno, "value row outside a segment"));
            }
            for tok in line.split(' ') {
                let bits = u64::from_str_radix(tok, 16)
                    .map_err(|_| parse_err(path, lineno, format!("bad hex value {tok:?}")))?;
                values.push(T::from_bits_u64(bits));
            }
            expect_rows -= 1;
        }
    }
    if seg_iter.next().is_some() || expect_rows != 0 {
        return Err(parse_err(path, h.lines.len(), "model file ended early"));
    }
    if values.len() != layout.total {
        return Err(parse_err(
            path,
            h.lines.len(),
            format!("expected {} values, got {}", layout.total, values.len()),
        ));
    }
    let params = ModelParams { layout, values };
    params.check_shapes(&spec)?;
    Ok(ModelArtifact {
        spec,
        params,
        seeds,
    })
}

// ---------------------------------------------------------------------------
// Prediction matrices
// ---------------------------------------------------------------------------

/// One line per example, one column per member; multi-class cells join the
/// class probabilities with ';'.
pub fn save_predictions<T: Scalar>(path: &Path, matrix: &PredictionMatrix<T>) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| open_err(path, e))?;
    let mut w = BufWriter::new(file);
    let n_members = matrix.n_members();
    let task_line = match matrix {
        PredictionMatrix::Value { .. } => "#kind=value".to_owned(),
        PredictionMatrix::Distribution { classes, .. } => format!("#kind=distribution\n#classes={classes}"),
    };
    writeln!(w, "#predvar predictions v1\n{task_line}\n#n_members={n_members}")
        .map_err(|e| open_err(path, e))?;
    let header: Vec<String> = std::iter::once("row_id".to_owned())
        .chain((0..n_members).map(|m| format!("m{m}")))
        .collect();
    writeln!(w, "{}", header.join("\t")).map_err(|e| open_err(path, e))?;

    match matrix {
        PredictionMatrix::Value { row_ids, rows } => {
            for (j, row_id) in row_ids.iter().enumerate() {
                let mut line = row_id.to_string();
                for member in rows {
                    line.push('\t');
                    line.push_str(&fmt_scalar(member[j]));
                }
                writeln!(w, "{line}").map_err(|e| open_err(path, e))?;
            }
        }
        PredictionMatrix::Distribution { row_ids, rows, .. } => {
            for (j, row_id) in row_ids.iter().enumerate() {
                let mut line = row_id.to_string();
                for member in rows {
                    line.push('\t');
                    line.push_str(
                        &member[j]
                            .iter()
                            .map(|v| fmt_scalar(*v))
                            .collect::<Vec<_>>()
                            .join(";"),
                    );
                }
                writeln!(w, "{line}").map_err(|e| open_err(path, e))?;
            }
        }
    }
    w.flush().map_err(|e| open_err(path, e))
}

pub fn load_predictions<T: Scalar>(path: &Path) -> Result<PredictionMatrix<T>> {
    let h = read_with_header(path, "predictions")?;
    let kind = meta_required(&h, path, "kind")?;
    let n_members: usize = meta_required(&h, path, "n_members")?
        .parse()
        .map_err(|_| parse_err(path, 1, "bad #n_members="))?;

    let mut row_ids = Vec::new();
    let mut value_columns: Vec<Vec<T>> = vec![Vec::new(); n_members];
    let mut dist_columns: Vec<Vec<Vec<T>>> = vec![Vec::new(); n_members];
    for (i, line) in h.lines.iter().enumerate().skip(h.body_start) {
        let lineno = i + 1;
        if line.is_empty() || line.starts_with("row_id\t") {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != n_members + 1 {
            return Err(parse_err(path, lineno, format!("expected {} columns", n_members + 1)));
        }
        row_ids.push(
            fields[0]
                .parse()
                .map_err(|_| parse_err(path, lineno, "bad row_id"))?,
        );
        for (m, tok) in fields[1..].iter().enumerate() {
            if kind == "value" {
                value_columns[m].push(parse_scalar(tok, path, lineno)?);
            } else {
                let dist: Vec<T> = tok
                    .split(';')
                    .map(|v| parse_scalar(v, path, lineno))
                    .collect::<Result<_>>()?;
                dist_columns[m].push(dist);
            }
        }
    }

    match kind {
        "value" => Ok(PredictionMatrix::Value {
            row_ids,
            rows: value_columns,
        }),
        "distribution" => {
            let classes: usize = meta_required(&h, path, "classes")?
                .parse()
                .map_err(|_| parse_err(path, 1, "bad #classes="))?;
            Ok(PredictionMatrix::Distribution {
                row_ids,
                classes,
                rows: dist_columns,
            })
        }
        other => Err(parse_err(path, 1, format!("unknown predictions kind {other:?}"))),
    }
}

// ---------------------------------------------------------------------------
// PV tables
// ---------------------------------------------------------------------------

pub fn save_pv_table<T: Scalar>(path: &Path, table: &PvTable<T>) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| open_err(path, e))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "#predvar pv v1\nrow_id\tpv\tmean_prediction\tpv_coefficient")
        .map_err(|e| open_err(path, e))?;
    for row in &table.rows {
        let mean = match &row.mean_prediction {
            MeanPrediction::Value(v) => fmt_scalar(*v),
            MeanPrediction::Distribution(d) => d
                .iter()
                .map(|v| fmt_scalar(*v))
                .collect::<Vec<_>>()
                .join(";"),
        };
        let coeff = row.pv_coefficient.map(fmt_scalar).unwrap_or_default();
        writeln!(w, "{}\t{}\t{}\t{}", row.row_id, fmt_scalar(row.pv), mean, coeff)
            .map_err(|e| open_err(path, e))?;
    }
    w.flush().map_err(|e| open_err(path, e))
}

pub fn load_pv_table<T: Scalar>(path: &Path) -> Result<PvTable<T>> {
    let h = read_with_header(path, "pv")?;
    let mut rows = Vec::new();
    for (i, line) in h.lines.iter().enumerate().skip(h.body_start) {
        let lineno = i + 1;
        if line.is_empty() || line.starts_with("row_id\t") {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(parse_err(path, lineno, "expected 4 tab-separated fields"));
        }
        let mean = if fields[2].contains(';') {
            MeanPrediction::Distribution(
                fields[2]
                    .split(';')
                    .map(|v| parse_scalar(v, path, lineno))
                    .collect::<Result<_>>()?,
            )
        } else {
            MeanPrediction::Value(parse_scalar(fields[2], path, lineno)?)
        };
        rows.push(PvRow {
            row_id: fields[0]
                .parse()
                .map_err(|_| parse_err(path, lineno, "bad row_id"))?,
            pv: parse_scalar(fields[1], path, lineno)?,
            mean_prediction: mean,
            pv_coefficient: if fields[3].is_empty() {
                None
            } else {
                Some(parse_scalar(fields[3], path, lineno)?)
            },
        });
    }
    Ok(PvTable { rows })
}

// ---------------------------------------------------------------------------
// Neuron stats, correlation matrices, size sweeps
// ---------------------------------------------------------------------------

pub fn save_neuron_stats<T: Scalar>(path: &Path, stats: &NeuronStats<T>, layers: &[usize]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| open_err(path, e))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "#predvar neuron-stats v1\nneuron\tlayer\tmean\tstd\tactivation_rate")
        .map_err(|e| open_err(path, e))?;
    for (i, layer) in layers.iter().enumerate().take(stats.len()) {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}",
            i,
            layer,
            fmt_scalar(stats.mean[i]),
            fmt_scalar(stats.std[i]),
            fmt_scalar(stats.activation_rate[i]),
        )
        .map_err(|e| open_err(path, e))?;
    }
    w.flush().map_err(|e| open_err(path, e))
}

/// Activation-strength feature rows aligned by row_id.
pub fn save_feature_matrix<T: Scalar>(path: &Path, row_ids: &[u64], rows: &[Vec<T>]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| open_err(path, e))?;
    let mut w = BufWriter::new(file);
    let width = rows.first().map(Vec::len).unwrap_or(0);
    writeln!(w, "#predvar features v1\n#width={width}\nrow_id\tfeatures")
        .map_err(|e| open_err(path, e))?;
    for (row_id, row) in row_ids.iter().zip(rows) {
        let line = row.iter().map(|v| fmt_scalar(*v)).collect::<Vec<_>>().join(",");
        writeln!(w, "{row_id}\t{line}").map_err(|e| open_err(path, e))?;
    }
    w.flush().map_err(|e| open_err(path, e))
}

/// Labeled K x K correlation matrix.
pub fn save_correlation_matrix<T: Scalar>(
    path: &Path,
    labels: &[String],
    matrix: &[Vec<Option<T>>],
) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| open_err(path, e))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "#predvar correlation v1").map_err(|e| open_err(path, e))?;
    writeln!(w, "\t{}", labels.join("\t")).map_err(|e| open_err(path, e))?;
    for (label, row) in labels.iter().zip(matrix) {
        let cells: Vec<String> = row
            .iter()
            .map(|c| c.map(fmt_scalar).unwrap_or_else(|| "undefined".to_owned()))
            .collect();
        writeln!(w, "{label}\t{}", cells.join("\t")).map_err(|e| open_err(path, e))?;
    }
    w.flush().map_err(|e| open_err(path, e))
}

pub fn save_size_sweep<T: Scalar>(path: &Path, points: &[SizeSweepPoint<T>], meta: &[(String, String)]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| open_err(path, e))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "#predvar size-sweep v1").map_err(|e| open_err(path, e))?;
    for (k, v) in meta {
        writeln!(w, "#{k}={v}").map_err(|e| open_err(path, e))?;
    }
    writeln!(w, "size\tmean_delta_ratio\tstd_delta_ratio").map_err(|e| open_err(path, e))?;
    for p in points {
        writeln!(
            w,
            "{}\t{}\t{}",
            p.size,
            fmt_scalar(p.mean_delta_ratio),
            fmt_scalar(p.std_delta_ratio)
        )
        .map_err(|e| open_err(path, e))?;
    }
    w.flush().map_err(|e| open_err(path, e))
}

// ---------------------------------------------------------------------------
// Flat key-value files (manifests and reports)
// ---------------------------------------------------------------------------

/// Ordered key-value file; the shared shape of manifests and reports.
pub fn save_kv(path: &Path, kind: &str, pairs: &[(String, String)]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| open_err(path, e))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "#predvar {kind} v1").map_err(|e| open_err(path, e))?;
    for (k, v) in pairs {
        writeln!(w, "{k} = {v}").map_err(|e| open_err(path, e))?;
    }
    w.flush().map_err(|e| open_err(path, e))
}

/// Read a key-value file back into (ordered pairs, map).
pub fn load_kv(path: &Path, kind: &str) -> Result<Vec<(String, String)>> {
    let h = read_with_header(path, kind)?;
    let mut pairs = Vec::new();
    for (i, line) in h.lines.iter().enumerate().skip(h.body_start) {
        let lineno = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (k, v) = trimmed
            .split_once('=')
            .ok_or_else(|| parse_err(path, lineno, "expected `key = value`"))?;
        pairs.push((k.trim().to_owned(), v.trim().to_owned()));
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synthetic::{default_cat_cardinalities, gen_synthetic_binary};
    use crate::nn::init_params;

    #[test]
    fn dataset_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.tsv");
        let ds: Dataset<f64> = gen_synthetic_binary(50, 5, &default_cat_cardinalities(7), 3).unwrap();
        save_dataset(&path, &ds).unwrap();
        let loaded: Dataset<f64> = load_dataset(&path).unwrap();
        assert_eq!(ds, loaded);
    }

    #[test]
    fn model_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.txt");
        let spec = ModelSpec::<f64> {
            task: TaskKind::Multiclass(3),
            embeddings: vec![EmbeddingSpec {
                feature_name: "id".to_owned(),
                vocab_size: 11,
                embedding_dim: 4,
            }],
            numeric_inputs: 2,
            hidden_sizes: vec![5, 3],
            temperature: 0.2,
            dropout_rate: 0.0,
            output_clamp: None,
        };
        let params = init_params(&spec, 77).unwrap();
        let artifact = ModelArtifact {
            spec,
            params,
            seeds: TrainSeeds {
                init: 77,
                shuffle: Some(5),
                dropout: None,
            },
        };
        save_model(&path, &artifact).unwrap();
        let loaded: ModelArtifact<f64> = load_model(&path).unwrap();
        assert_eq!(artifact, loaded);
    }

    #[test]
    fn predictions_round_trip_value_and_distribution() {
        let dir = tempfile::tempdir().unwrap();
        let value = PredictionMatrix::Value {
            row_ids: vec![5, 9, 2],
            rows: vec![vec![0.125, 0.5, 0.75], vec![0.3, 0.1, 0.9]],
        };
        let p = dir.path().join("value.tsv");
        save_predictions(&p, &value).unwrap();
        assert_eq!(load_predictions::<f64>(&p).unwrap(), value);

        let dist = PredictionMatrix::Distribution {
            row_ids: vec![1, 2],
            classes: 3,
            rows: vec![
                vec![vec![0.2, 0.3, 0.5], vec![0.1, 0.8, 0.1]],
                vec![vec![0.4, 0.4, 0.2], vec![0.3, 0.3, 0.4]],
            ],
        };
        let p = dir.path().join("dist.tsv");
        save_predictions(&p, &dist).unwrap();
        assert_eq!(load_predictions::<f64>(&p).unwrap(), dist);
    }

    #[test]
    fn pv_table_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pv.tsv");
        let table = PvTable {
            rows: vec![
                PvRow {
                    row_id: 3,
                    pv: 0.1,
                    mean_prediction: MeanPrediction::Value(3.5),
                    pv_coefficient: Some(0.1 / 3.5),
                },
                PvRow {
                    row_id: 4,
                    pv: 0.0,
                    mean_prediction: MeanPrediction::Distribution(vec![0.25, 0.75]),
                    pv_coefficient: None,
                },
            ],
        };
        save_pv_table(&path, &table).unwrap();
        assert_eq!(load_pv_table::<f64>(&path).unwrap(), table);
    }

    #[test]
    fn kv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.cfg");
        let pairs = vec![
            ("setting".to_owned(), "R3".to_owned()),
            ("n".to_owned(), "25".to_owned()),
        ];
        save_kv(&path, "manifest", &pairs).unwrap();
        assert_eq!(load_kv(&path, "manifest").unwrap(), pairs);
    }

    #[test]
    fn wrong_kind_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.cfg");
        save_kv(&path, "manifest", &[]).unwrap();
        assert!(load_kv(&path, "report").is_err());
    }
}
