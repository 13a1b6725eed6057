//! `delta-ratio`: how much a smaller ensemble's variation estimates deviate
//! from a larger universe's, across candidate sizes.

use std::path::PathBuf;

use clap::Args as ClapArgs;
use predvar::artifacts::{load_predictions, save_size_sweep, sha256_file};
use predvar::variation::size_sweep;
use predvar::Result;

use crate::config::{parse_list, Config};

#[derive(ClapArgs, Debug)]
pub struct Args {
    /// Config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Prediction matrix of the model universe.
    #[arg(long)]
    universe: Option<PathBuf>,
    /// Comma-separated ensemble sizes to sample, e.g. 10,30,60.
    #[arg(long)]
    sizes: Option<String>,
    /// Resamples per size.
    #[arg(long)]
    resamples: Option<usize>,
    /// Sampling seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output sweep table.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: Args) -> Result<()> {
    let cfg = match &args.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let universe_path: PathBuf = cfg.resolve("universe", args.universe.clone(), None)?;
    let sizes_raw: String = cfg.resolve("sizes", args.sizes.clone(), None)?;
    let resamples: usize = cfg.resolve("resamples", args.resamples, Some(20))?;
    let seed: u64 = cfg.resolve("seed", args.seed, None)?;
    let out: PathBuf = cfg.resolve("out", args.out.clone(), None)?;

    let sizes: Vec<usize> = parse_list(&sizes_raw, "size")?;
    let universe = load_predictions::<f64>(&universe_path)?;
    let points = size_sweep(&universe, &sizes, resamples, seed)?;

    let meta = vec![
        ("command".to_owned(), "delta-ratio".to_owned()),
        ("universe".to_owned(), universe_path.display().to_string()),
        ("universe.sha256".to_owned(), sha256_file(&universe_path)?),
        ("universe_members".to_owned(), universe.n_members().to_string()),
        ("sizes".to_owned(), sizes_raw.clone()),
        ("resamples".to_owned(), resamples.to_string()),
        ("seed".to_owned(), seed.to_string()),
    ];
    save_size_sweep(&out, &points, &meta)?;
    for p in &points {
        println!(
            "size {}: delta ratio {:.4} +/- {:.4}",
            p.size, p.mean_delta_ratio, p.std_delta_ratio
        );
    }
    Ok(())
}
