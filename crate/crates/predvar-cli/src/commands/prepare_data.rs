//! `prepare-data`: ingest MovieLens files or generate synthetic data, then
//! write canonical train/test dumps plus a provenance manifest.

use std::path::PathBuf;

use clap::Args as ClapArgs;
use predvar::artifacts::save_dataset;
use predvar::data::movielens::load_movielens;
use predvar::data::synthetic::{default_cat_cardinalities, gen_synthetic_binary, write_movielens_like};
use predvar::data::split;
use predvar::rng::derive_seed;
use predvar::{DatasetF64, Error, Result};

use crate::common::{data_file, ensure_dir, files, Manifest};
use crate::config::{parse_list, Config};

#[derive(ClapArgs, Debug)]
pub struct Args {
    /// Config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Data source: movielens, synthetic, or synthetic-movielens.
    #[arg(long)]
    source: Option<String>,
    /// Output directory for the canonical dumps.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed for splitting (and generation, for synthetic sources).
    #[arg(long)]
    seed: Option<u64>,
    /// Train/test fractions, e.g. 0.6,0.4.
    #[arg(long)]
    splits: Option<String>,
    /// Also split the test dump 50/50 into estimator train/test dumps.
    #[arg(long)]
    estimator_split: bool,
    /// movielens source: ratings.dat path.
    #[arg(long)]
    ratings: Option<PathBuf>,
    /// movielens source: users.dat path.
    #[arg(long)]
    users: Option<PathBuf>,
    /// movielens source: movies.dat path.
    #[arg(long)]
    movies: Option<PathBuf>,
    /// synthetic sources: number of rows to generate.
    #[arg(long)]
    rows: Option<usize>,
    /// synthetic source: cardinality of each of the 26 categorical features.
    #[arg(long)]
    cat_cardinality: Option<usize>,
    /// synthetic-movielens source: user count (default rows/50).
    #[arg(long)]
    users_n: Option<usize>,
    /// synthetic-movielens source: movie count (default rows/80).
    #[arg(long)]
    movies_n: Option<usize>,
}

pub fn run(args: Args) -> Result<()> {
    let cfg = match &args.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let source: String = cfg.resolve("source", args.source.clone(), None)?;
    let out: PathBuf = cfg.resolve("out", args.out.clone(), None)?;
    let seed: u64 = cfg.resolve("seed", args.seed, None)?;
    let splits_raw: String = cfg.resolve("splits", args.splits.clone(), Some("0.6,0.4".to_owned()))?;
    let estimator_split: bool =
        cfg.resolve("estimator_split", args.estimator_split.then_some(true), Some(false))?;

    let fractions: Vec<f64> = parse_list(&splits_raw, "split fraction")?;
    if fractions.len() != 2 {
        return Err(Error::Config(format!(
            "expected exactly two split fractions (train,test), got {}",
            fractions.len()
        )));
    }

    ensure_dir(&out)?;
    let mut manifest = Manifest::new("prepare-data");
    manifest.push("source", &source);
    manifest.push("seed", seed);
    manifest.push("splits", &splits_raw);
    manifest.push("estimator_split", estimator_split);

    let full: DatasetF64 = match source.as_str() {
        "movielens" => {
            let ratings: PathBuf = cfg.resolve("ratings", args.ratings.clone(), None)?;
            let users: PathBuf = cfg.resolve("users", args.users.clone(), None)?;
            let movies: PathBuf = cfg.resolve("movies", args.movies.clone(), None)?;
            manifest.push_input("ratings", &ratings)?;
            manifest.push_input("users", &users)?;
            manifest.push_input("movies", &movies)?;
            load_movielens(&ratings, &users, &movies)?
        }
        "synthetic" => {
            let rows: usize = cfg.resolve("rows", args.rows, None)?;
            let card: usize = cfg.resolve("cat_cardinality", args.cat_cardinality, Some(50))?;
            manifest.push("rows", rows);
            manifest.push("cat_cardinality", card);
            gen_synthetic_binary(rows, 13, &default_cat_cardinalities(card), derive_seed(seed, "synthetic"))?
        }
        "synthetic-movielens" => {
            let rows: usize = cfg.resolve("rows", args.rows, None)?;
            let users_n: usize = cfg.resolve("users_n", args.users_n, Some((rows / 50).max(10)))?;
            let movies_n: usize = cfg.resolve("movies_n", args.movies_n, Some((rows / 80).max(10)))?;
            manifest.push("rows", rows);
            manifest.push("users_n", users_n);
            manifest.push("movies_n", movies_n);
            let src_dir = out.join("movielens-src");
            let paths = write_movielens_like(&src_dir, users_n, movies_n, rows, derive_seed(seed, "ml-like"))?;
            manifest.push_input("ratings", &paths.ratings)?;
            manifest.push_input("users", &paths.users)?;
            manifest.push_input("movies", &paths.movies)?;
            load_movielens(&paths.ratings, &paths.users, &paths.movies)?
        }
        other => {
            return Err(Error::Config(format!(
                "unknown source {other:?} (expected movielens, synthetic, or synthetic-movielens)"
            )))
        }
    };
    manifest.push("total_rows", full.len());

    let mut parts = split(&full, &fractions, seed)?;
    parts[0].provenance.split_name = "d_t".to_owned();
    parts[1].provenance.split_name = "d_e".to_owned();
    let d_e = parts.pop().expect("two parts");
    let d_t = parts.pop().expect("two parts");

    let train_path = data_file(&out, files::TRAIN);
    let test_path = data_file(&out, files::TEST);
    save_dataset(&train_path, &d_t)?;
    save_dataset(&test_path, &d_e)?;
    manifest.push("d_t_rows", d_t.len());
    manifest.push("d_e_rows", d_e.len());
    manifest.push_input("d_t", &train_path)?;
    manifest.push_input("d_e", &test_path)?;

    if estimator_split {
        let mut halves = split(&d_e, &[0.5, 0.5], derive_seed(seed, "estimator-split"))?;
        halves[0].provenance.split_name = "d_e1".to_owned();
        halves[1].provenance.split_name = "d_e2".to_owned();
        let e1_path = data_file(&out, files::EST_TRAIN);
        let e2_path = data_file(&out, files::EST_TEST);
        save_dataset(&e1_path, &halves[0])?;
        save_dataset(&e2_path, &halves[1])?;
        manifest.push("d_e1_rows", halves[0].len());
        manifest.push("d_e2_rows", halves[1].len());
        manifest.push_input("d_e1", &e1_path)?;
        manifest.push_input("d_e2", &e2_path)?;
    }

    manifest.save(&out.join("prepare.cfg"), "manifest")?;
    println!("prepared {} rows into {}", full.len(), out.display());
    Ok(())
}
