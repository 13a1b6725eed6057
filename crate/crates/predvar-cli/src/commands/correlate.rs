//! `correlate`: pairwise Pearson correlation of per-example variation
//! tables, emitted as a labeled matrix.

use std::path::PathBuf;

use clap::Args as ClapArgs;
use predvar::artifacts::{load_pv_table, save_correlation_matrix, sha256_file};
use predvar::variation::pearson;
use predvar::{Error, PvTableF64, Result};

use crate::config::Config;

#[derive(ClapArgs, Debug)]
pub struct Args {
    /// Config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated variation table paths.
    #[arg(long)]
    pv_tables: Option<String>,
    /// Optional comma-separated labels (defaults to file stems).
    #[arg(long)]
    labels: Option<String>,
    /// Output matrix path.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: Args) -> Result<()> {
    let cfg = match &args.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let tables_raw: String = cfg.resolve("pv_tables", args.pv_tables.clone(), None)?;
    let out: PathBuf = cfg.resolve("out", args.out.clone(), None)?;
    let labels_raw: Option<String> = cfg.resolve_opt("labels", args.labels.clone())?;

    let paths: Vec<PathBuf> = tables_raw.split(',').map(|s| PathBuf::from(s.trim())).collect();
    if paths.len() < 2 {
        return Err(Error::Usage("correlate needs at least two variation tables".to_owned()));
    }
    let labels: Vec<String> = match labels_raw {
        Some(raw) => raw.split(',').map(|s| s.trim().to_owned()).collect(),
        None => paths
            .iter()
            .map(|p| {
                let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                if stem == "pv" {
                    // run-ensemble layouts name every table pv.tsv; the
                    // setting directory is the distinguishing part
                    p.parent()
                        .and_then(|d| d.file_name())
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or(stem)
                } else {
                    stem
                }
            })
            .collect(),
    };
    if labels.len() != paths.len() {
        return Err(Error::Config("label count does not match table count".to_owned()));
    }

    let tables: Vec<PvTableF64> = paths.iter().map(|p| load_pv_table(p)).collect::<Result<_>>()?;

    // Align every table to the first one's row ids.
    let reference = tables[0].row_ids();
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(tables.len());
    for (table, path) in tables.iter().zip(&paths) {
        let by_id: std::collections::HashMap<u64, f64> =
            table.rows.iter().map(|r| (r.row_id, r.pv)).collect();
        if by_id.len() != reference.len() {
            return Err(Error::Input(format!(
                "{}: row id set differs from {}",
                path.display(),
                paths[0].display()
            )));
        }
        let mut v = Vec::with_capacity(reference.len());
        for id in &reference {
            v.push(*by_id.get(id).ok_or_else(|| {
                Error::Input(format!("{}: missing row id {id}", path.display()))
            })?);
        }
        vectors.push(v);
    }

    let k = vectors.len();
    let mut matrix: Vec<Vec<Option<f64>>> = vec![vec![None; k]; k];
    for i in 0..k {
        for j in 0..k {
            matrix[i][j] = pearson(&vectors[i], &vectors[j]).ok();
        }
    }

    save_correlation_matrix(&out, &labels, &matrix)?;
    // provenance footer alongside the matrix
    let mut meta = vec![("command".to_owned(), "correlate".to_owned())];
    for (label, path) in labels.iter().zip(&paths) {
        meta.push((format!("input_{label}"), path.display().to_string()));
        meta.push((format!("input_{label}.sha256"), sha256_file(path)?));
    }
    predvar::artifacts::save_kv(&out.with_extension("cfg"), "manifest", &meta)?;
    println!("wrote {k}x{k} correlation matrix to {}", out.display());
    Ok(())
}
