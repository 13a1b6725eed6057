//! `fit-estimator`: collect activation-strength features from a target
//! model, train the variation estimator on the estimator-train split, and
//! evaluate it on the estimator-test split.

use std::collections::HashMap;
use std::path::PathBuf;

use clap::Args as ClapArgs;
use predvar::artifacts::{load_model, load_pv_table, save_kv, save_model, save_neuron_stats, ModelArtifact};
use predvar::estimator::{
    eval_classification, eval_regression, train_classifier, train_regressor, EstimatorSpec, Objective,
};
use predvar::probe::{feature_matrix, neuron_layers, neuron_stats, FeatureMode};
use predvar::variation::bucketize;
use predvar::{DatasetF64, Error, PvTableF64, Result};

use crate::common::{data_file, ensure_dir, files, fmt_opt, load_data, Manifest};
use crate::config::Config;

#[derive(ClapArgs, Debug)]
pub struct Args {
    /// Config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Objective: reg or cls.
    #[arg(long)]
    objective: Option<String>,
    /// Feature families: B or BV.
    #[arg(long)]
    features: Option<String>,
    /// Prepared data directory holding the estimator splits.
    #[arg(long)]
    data: Option<PathBuf>,
    /// run-ensemble output directory for one setting (provides pv.tsv and
    /// member models).
    #[arg(long)]
    ensemble: Option<PathBuf>,
    /// Estimator training seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Which ensemble member acts as the probed target model.
    #[arg(long)]
    target_member: Option<usize>,
    /// Explicit target model artifact (overrides --target-member).
    #[arg(long)]
    target_model: Option<PathBuf>,
    /// Bucket count for the classification objective.
    #[arg(long)]
    buckets: Option<usize>,
    /// Also dump the extracted feature matrices.
    #[arg(long)]
    dump_features: bool,
}

fn select_pv(table: &PvTableF64, data: &DatasetF64, what: &str) -> Result<Vec<f64>> {
    let by_id: HashMap<u64, f64> = table.rows.iter().map(|r| (r.row_id, r.pv)).collect();
    data.rows
        .iter()
        .map(|ex| {
            by_id.get(&ex.row_id).copied().ok_or_else(|| {
                Error::Input(format!("{what}: variation table has no row id {}", ex.row_id))
            })
        })
        .collect()
}

pub fn run(args: Args) -> Result<()> {
    let cfg = match &args.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let objective_raw: String = cfg.resolve("objective", args.objective.clone(), None)?;
    let features_raw: String = cfg.resolve("features", args.features.clone(), Some("BV".to_owned()))?;
    let data_dir: PathBuf = cfg.resolve("data", args.data.clone(), None)?;
    let ensemble_dir: PathBuf = cfg.resolve("ensemble", args.ensemble.clone(), None)?;
    let seed: u64 = cfg.resolve("seed", args.seed, None)?;
    let out: PathBuf = cfg.resolve("out", args.out.clone(), None)?;
    let target_member: usize = cfg.resolve("target_member", args.target_member, Some(0))?;
    let target_model_path: Option<PathBuf> = cfg.resolve_opt("target_model", args.target_model.clone())?;
    let buckets: usize = cfg.resolve("buckets", args.buckets, Some(5))?;
    let dump_features: bool =
        cfg.resolve("dump_features", args.dump_features.then_some(true), Some(false))?;

    let mode = FeatureMode::parse(&features_raw)?;
    let objective = match objective_raw.as_str() {
        "reg" => Objective::Regression,
        "cls" => Objective::Classification(buckets),
        other => return Err(Error::Config(format!("unknown objective {other:?} (expected reg or cls)"))),
    };

    let d_e1 = load_data(&data_dir, files::EST_TRAIN)?;
    let d_e2 = load_data(&data_dir, files::EST_TEST)?;
    let pv_path = ensemble_dir.join("pv.tsv");
    let pv = load_pv_table::<f64>(&pv_path)?;

    let model_path = match target_model_path {
        Some(p) => p,
        None => ensemble_dir
            .join("members")
            .join(format!("member_{target_member:03}.model")),
    };
    let target: ModelArtifact<f64> = load_model(&model_path)?;

    ensure_dir(&out)?;
    let mut manifest = Manifest::new("fit-estimator");
    manifest.push("objective", &objective_raw);
    manifest.push("features", mode.code());
    manifest.push("data", data_dir.display());
    manifest.push("ensemble", ensemble_dir.display());
    manifest.push("seed", seed);
    manifest.push("buckets", buckets);
    manifest.push_input("d_e1", &data_file(&data_dir, files::EST_TRAIN))?;
    manifest.push_input("d_e2", &data_file(&data_dir, files::EST_TEST))?;
    manifest.push_input("pv", &pv_path)?;
    manifest.push_input("target_model", &model_path)?;
    // setting code recorded for the report, when the ensemble manifest exists
    if let Ok(pairs) = predvar::artifacts::load_kv(&ensemble_dir.join("manifest.cfg"), "manifest") {
        if let Some((_, setting)) = pairs.iter().find(|(k, _)| k == "setting") {
            manifest.push("setting", setting);
        }
    }

    // Normalization statistics come from the estimator-training split.
    let stats = neuron_stats(&target.spec, &target.params, &d_e1)?;
    let stats_path = out.join("neuron_stats.tsv");
    save_neuron_stats(&stats_path, &stats, &neuron_layers(&target.spec))?;

    let (train_x, train_ids) = feature_matrix(&target.spec, &target.params, &stats, &d_e1, mode)?;
    let (test_x, test_ids) = feature_matrix(&target.spec, &target.params, &stats, &d_e2, mode)?;
    if dump_features {
        predvar::artifacts::save_feature_matrix(&out.join("features_train.tsv"), &train_ids, &train_x)?;
        predvar::artifacts::save_feature_matrix(&out.join("features_test.tsv"), &test_ids, &test_x)?;
    }
    let train_pv = select_pv(&pv, &d_e1, "estimator-train")?;
    let test_pv = select_pv(&pv, &d_e2, "estimator-test")?;

    let mut report = manifest;
    match objective {
        Objective::Regression => {
            let espec = EstimatorSpec::regression(mode);
            let model = train_regressor(&train_x, &train_pv, &espec, seed)?;
            let eval = eval_regression(&model, &test_x, &test_pv)?;
            report.push("mse", eval.mse);
            report.push("r2", fmt_opt(eval.r2));
            let clamp = model.clamp.expect("regression estimator has a clamp");
            report.push("clamp_upper", clamp.upper);
            save_model(
                &out.join("estimator.model"),
                &ModelArtifact {
                    spec: model.spec.clone(),
                    params: model.params.clone(),
                    seeds: model.seeds,
                },
            )?;
            println!(
                "regression estimator: mse={} r2={}",
                eval.mse,
                fmt_opt(eval.r2)
            );
        }
        Objective::Classification(k) => {
            let scheme = bucketize(&train_pv, k)?;
            let train_labels: Vec<usize> = train_pv.iter().map(|&v| scheme.assign(v)).collect();
            let test_labels: Vec<usize> = test_pv.iter().map(|&v| scheme.assign(v)).collect();
            let espec = EstimatorSpec {
                objective: Objective::Classification(scheme.k),
                ..EstimatorSpec::classification(mode)
            };
            let model = train_classifier(&train_x, &train_labels, &espec, seed)?;
            let eval = eval_classification(&model, &test_x, &test_labels, scheme.k)?;
            report.push(
                "thresholds",
                scheme
                    .thresholds
                    .iter()
                    .map(|t| t.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            );
            report.push("accuracy", eval.accuracy);
            for (b, auc) in eval.auc.iter().enumerate() {
                report.push(format!("auc_bucket_{}", b + 1), fmt_opt(*auc));
            }
            let confusion_path = out.join("confusion.tsv");
            let mut text = String::from("#predvar confusion v1\n");
            for row in &eval.confusion {
                text.push_str(
                    &row.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("\t"),
                );
                text.push('\n');
            }
            std::fs::write(&confusion_path, text)
                .map_err(|e| Error::io(confusion_path.display().to_string(), e))?;
            report.push("confusion", confusion_path.display());
            save_model(
                &out.join("estimator.model"),
                &ModelArtifact {
                    spec: model.spec.clone(),
                    params: model.params.clone(),
                    seeds: model.seeds,
                },
            )?;
            println!("bucket classifier: accuracy={}", eval.accuracy);
        }
    }
    report.push("neuron_stats", stats_path.display());
    save_kv(&out.join("report.cfg"), "report", report.pairs())?;
    Ok(())
}
