//! `run-ensemble`: train an ensemble per randomness setting, then dump the
//! member models, prediction matrix, variation table, target metrics, and a
//! replayable manifest.

use std::path::PathBuf;

use clap::Args as ClapArgs;
use predvar::artifacts::{save_kv, save_model, save_predictions, save_pv_table, ModelArtifact};
use predvar::ensemble::{mean_predictions, predict_matrix, train_ensemble, RandomnessSetting};
use predvar::metrics::target_metrics;
use predvar::nn::train::TrainSeeds;
use predvar::variation::pv_table;
use predvar::{Error, Result};

use crate::common::{data_file, ensure_dir, files, fmt_opt, load_data, Manifest, TaskId};
use crate::config::Config;

#[derive(ClapArgs, Debug)]
pub struct Args {
    /// Config file (e.g. an emitted manifest); flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Target task: ml-r, ml-c, or synth-binary.
    #[arg(long)]
    task: Option<String>,
    /// Prepared data directory (from prepare-data).
    #[arg(long)]
    data: Option<PathBuf>,
    /// Randomness settings, e.g. R3 or R1,R2,R7.
    #[arg(long)]
    setting: Option<String>,
    /// Ensemble size.
    #[arg(long)]
    n: Option<usize>,
    /// Master seed deriving every member seed bundle.
    #[arg(long)]
    master_seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for member training (results are invariant to this).
    #[arg(long)]
    workers: Option<usize>,
    /// Override the task preset's epoch budget.
    #[arg(long)]
    epochs: Option<usize>,
    /// Override the task preset's batch size.
    #[arg(long)]
    batch_size: Option<usize>,
    /// Override the task preset's learning rate.
    #[arg(long)]
    learning_rate: Option<f64>,
    /// Skip writing per-member model artifacts.
    #[arg(long)]
    skip_models: bool,
}

pub fn run(args: Args) -> Result<()> {
    let cfg = match &args.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let task = TaskId::parse(&cfg.resolve::<String>("task", args.task.clone(), None)?)?;
    let data_dir: PathBuf = cfg.resolve("data", args.data.clone(), None)?;
    let setting_raw: String = cfg.resolve("setting", args.setting.clone(), None)?;
    let n: usize = cfg.resolve("n", args.n, None)?;
    let master_seed: u64 = cfg.resolve("master_seed", args.master_seed, None)?;
    let out: PathBuf = cfg.resolve("out", args.out.clone(), None)?;
    let workers: usize = cfg.resolve("workers", args.workers, Some(1))?;
    let skip_models: bool = cfg.resolve("skip_models", args.skip_models.then_some(true), Some(false))?;

    let settings: Vec<RandomnessSetting> = setting_raw
        .split(',')
        .map(|s| RandomnessSetting::parse(s.trim()))
        .collect::<Result<_>>()?;

    let d_t = task.adapt(load_data(&data_dir, files::TRAIN)?)?;
    let d_e = task.adapt(load_data(&data_dir, files::TEST)?)?;
    let spec = task.model_spec(&d_t.schema)?;
    let mut config = task.train_config();
    if let Some(epochs) = cfg.resolve_opt("epochs", args.epochs)? {
        config.max_epochs = epochs;
    }
    if let Some(batch) = cfg.resolve_opt("batch_size", args.batch_size)? {
        config.batch_size = batch;
    }
    if let Some(lr) = cfg.resolve_opt("learning_rate", args.learning_rate)? {
        config.learning_rate = lr;
    }

    ensure_dir(&out)?;
    let mut report_rows: Vec<Vec<String>> = Vec::new();

    for setting in &settings {
        let code = setting.code();
        let setting_dir = out.join(&code);
        ensure_dir(&setting_dir)?;

        let ensemble = train_ensemble(&spec, &config, &d_t, *setting, n, master_seed, workers)?;
        let matrix = predict_matrix(&ensemble, &d_e)?;
        let pv = pv_table(&matrix)?;
        let means = mean_predictions(&matrix);
        let labels: Vec<_> = d_e.rows.iter().map(|r| r.label).collect();
        let metrics = target_metrics(&means, &labels, spec.task)?;

        let mut manifest = Manifest::new("run-ensemble");
        manifest.push("task", task.code());
        manifest.push("data", data_dir.display());
        manifest.push_input("d_t", &data_file(&data_dir, files::TRAIN))?;
        manifest.push_input("d_e", &data_file(&data_dir, files::TEST))?;
        manifest.push("setting", &code);
        manifest.push("n", n);
        manifest.push("master_seed", master_seed);
        manifest.push("workers", workers);
        manifest.push("epochs", config.max_epochs);
        manifest.push("batch_size", config.batch_size);
        manifest.push("learning_rate", config.learning_rate);
        manifest.push("skip_models", skip_models);

        if !skip_models {
            let members_dir = setting_dir.join("members");
            ensure_dir(&members_dir)?;
            for (i, member) in ensemble.members.iter().enumerate() {
                let path = members_dir.join(format!("member_{i:03}.model"));
                let artifact = ModelArtifact {
                    spec: spec.clone(),
                    params: member.params.clone(),
                    seeds: TrainSeeds {
                        init: member.bundle.init_seed,
                        shuffle: member.bundle.shuffle_seed,
                        dropout: None,
                    },
                };
                save_model(&path, &artifact)?;
            }
            manifest.push("members_dir", members_dir.display());
        }
        for (i, member) in ensemble.members.iter().enumerate() {
            manifest.push(format!("member_{i}_init_seed"), member.bundle.init_seed);
            if let Some(s) = member.bundle.shuffle_seed {
                manifest.push(format!("member_{i}_shuffle_seed"), s);
            }
            if let Some(j) = member.bundle.jackknife_index {
                manifest.push(format!("member_{i}_jackknife_index"), j);
            }
        }

        let pred_path = setting_dir.join("predictions.tsv");
        let pv_path = setting_dir.join("pv.tsv");
        save_predictions(&pred_path, &matrix)?;
        save_pv_table(&pv_path, &pv)?;
        // dataset copy of the scored rows is already in the data dir; record it
        manifest.push("predictions", pred_path.display());
        manifest.push("pv", pv_path.display());

        let mse = metrics.mse;
        let acc = metrics.accuracy;
        let auc = metrics.auc;
        let brier = metrics.brier;
        let pv_mean = pv.mean_pv();
        let pv_std = pv.std_pv();
        let pv_coeff = pv.mean_coefficient();

        let metrics_pairs = vec![
            ("setting".to_owned(), code.clone()),
            ("task".to_owned(), task.code().to_owned()),
            ("n".to_owned(), n.to_string()),
            ("mse".to_owned(), fmt_opt(mse)),
            ("accuracy".to_owned(), fmt_opt(acc)),
            ("auc".to_owned(), fmt_opt(auc)),
            ("brier".to_owned(), fmt_opt(brier)),
            ("pv_mean".to_owned(), pv_mean.to_string()),
            ("pv_std".to_owned(), pv_std.to_string()),
            ("pv_coeff_mean".to_owned(), fmt_opt(pv_coeff)),
        ];
        save_kv(&setting_dir.join("metrics.cfg"), "report", &metrics_pairs)?;
        manifest.push("metrics", setting_dir.join("metrics.cfg").display());
        manifest.save(&setting_dir.join("manifest.cfg"), "manifest")?;

        report_rows.push(vec![
            code.clone(),
            fmt_opt(mse),
            fmt_opt(acc),
            fmt_opt(auc),
            fmt_opt(brier),
            pv_mean.to_string(),
            pv_std.to_string(),
            fmt_opt(pv_coeff),
        ]);
        println!(
            "{code}: n={n} pv_mean={pv_mean:.6} pv_std={pv_std:.6} ({} examples)",
            pv.len()
        );
    }

    // Combined table across the requested settings.
    let report_path = out.join("report.tsv");
    let mut text = String::from("#predvar settings-report v1\n");
    text.push_str(&format!("#task={}\n#n={n}\n#master_seed={master_seed}\n", task.code()));
    text.push_str(&format!(
        "#d_t.sha256={}\n#d_e.sha256={}\n",
        predvar::artifacts::sha256_file(&data_file(&data_dir, files::TRAIN))?,
        predvar::artifacts::sha256_file(&data_file(&data_dir, files::TEST))?,
    ));
    text.push_str("setting\tmse\taccuracy\tauc\tbrier\tpv_mean\tpv_std\tpv_coeff_mean\n");
    for row in &report_rows {
        text.push_str(&row.join("\t"));
        text.push('\n');
    }
    std::fs::write(&report_path, text).map_err(|e| Error::io(report_path.display().to_string(), e))?;
    Ok(())
}
