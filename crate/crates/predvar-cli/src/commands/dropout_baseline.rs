//! `dropout-baseline`: train one dropout model, estimate per-example
//! variation from stochastic inference passes, and compare against an
//! ensemble's variation table on the same rows.

use std::collections::HashSet;
use std::path::PathBuf;

use clap::Args as ClapArgs;
use predvar::artifacts::{load_pv_table, save_kv, save_pv_table};
use predvar::estimator::{compare_pv, mc_dropout_pv};
use predvar::{Error, Result};

use crate::common::{ensure_dir, files, fmt_opt, load_data, Manifest, TaskId};
use crate::config::Config;

#[derive(ClapArgs, Debug)]
pub struct Args {
    /// Config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Target task: ml-r or synth-binary (value tasks).
    #[arg(long)]
    task: Option<String>,
    /// Prepared data directory.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Dropout rate on the hidden layers.
    #[arg(long)]
    rate: Option<f64>,
    /// Stochastic inference passes per example.
    #[arg(long)]
    passes: Option<usize>,
    /// Training/inference seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Ensemble variation table to compare against.
    #[arg(long)]
    ensemble_pv: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Evaluation rows: d_e2 (default) or d_e.
    #[arg(long)]
    eval_split: Option<String>,
}

pub fn run(args: Args) -> Result<()> {
    let cfg = match &args.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let task = TaskId::parse(&cfg.resolve::<String>("task", args.task.clone(), None)?)?;
    let data_dir: PathBuf = cfg.resolve("data", args.data.clone(), None)?;
    let rate: f64 = cfg.resolve("rate", args.rate, Some(0.2))?;
    let passes: usize = cfg.resolve("passes", args.passes, Some(100))?;
    let seed: u64 = cfg.resolve("seed", args.seed, None)?;
    let ensemble_pv_path: PathBuf = cfg.resolve("ensemble_pv", args.ensemble_pv.clone(), None)?;
    let out: PathBuf = cfg.resolve("out", args.out.clone(), None)?;
    let eval_split: String = cfg.resolve("eval_split", args.eval_split.clone(), Some("d_e2".to_owned()))?;

    let eval_file = match eval_split.as_str() {
        "d_e2" => files::EST_TEST,
        "d_e" => files::TEST,
        other => return Err(Error::Config(format!("unknown eval split {other:?}"))),
    };

    let d_t = task.adapt(load_data(&data_dir, files::TRAIN)?)?;
    let eval_data = task.adapt(load_data(&data_dir, eval_file)?)?;
    let spec = task.model_spec(&d_t.schema)?;
    let config = task.train_config();

    let dropout_pv = mc_dropout_pv(&spec, &config, &d_t, &eval_data, rate, passes, seed)?;

    let ensemble_pv = load_pv_table::<f64>(&ensemble_pv_path)?;
    let keep: HashSet<u64> = dropout_pv.row_ids().into_iter().collect();
    let ensemble_on_eval = ensemble_pv.select(&keep);
    if ensemble_on_eval.len() != dropout_pv.len() {
        return Err(Error::Input(format!(
            "ensemble table covers {} of the {} evaluation rows",
            ensemble_on_eval.len(),
            dropout_pv.len()
        )));
    }
    // align dropout rows to the ensemble table's order
    let dropout_aligned = {
        let by_id: std::collections::HashMap<u64, _> =
            dropout_pv.rows.iter().map(|r| (r.row_id, r.clone())).collect();
        predvar::PvTableF64 {
            rows: ensemble_on_eval
                .rows
                .iter()
                .map(|r| by_id[&r.row_id].clone())
                .collect(),
        }
    };
    let cmp = compare_pv(&dropout_aligned, &ensemble_on_eval)?;

    ensure_dir(&out)?;
    let pv_path = out.join("dropout_pv.tsv");
    save_pv_table(&pv_path, &dropout_pv)?;

    let mut report = Manifest::new("dropout-baseline");
    report.push("task", task.code());
    report.push("data", data_dir.display());
    report.push("rate", rate);
    report.push("passes", passes);
    report.push("seed", seed);
    report.push("eval_split", &eval_split);
    report.push_input("ensemble_pv", &ensemble_pv_path)?;
    report.push("dropout_pv", pv_path.display());
    report.push("pearson", cmp.pearson);
    report.push("rmse", cmp.rmse);
    report.push("r2", fmt_opt(cmp.r2));
    save_kv(&out.join("report.cfg"), "report", report.pairs())?;
    println!(
        "dropout vs ensemble: pearson={:.4} rmse={:.6} r2={}",
        cmp.pearson,
        cmp.rmse,
        fmt_opt(cmp.r2)
    );
    Ok(())
}
