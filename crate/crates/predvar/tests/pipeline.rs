//! End-to-end wiring checks at small scale: ensembles under controlled
//! randomness, variation tables, probing, the estimator, and the dropout
//! baseline.

use approx::assert_relative_eq;
use predvar::data::synthetic::{default_cat_cardinalities, gen_synthetic_binary, write_movielens_like};
use predvar::data::{movielens::load_movielens, split, Dataset, TaskKind};
use predvar::ensemble::{
    make_seed_bundles, mean_predictions, predict_matrix, train_ensemble, RandomnessSetting,
};
use predvar::estimator::{
    compare_pv, eval_regression, mc_dropout_pv, train_regressor, EstimatorSpec,
};
use predvar::metrics::{target_metrics, temperature_sweep};
use predvar::nn::train::{EarlyStopping, Optimizer, TrainConfig};
use predvar::nn::ModelSpec;
use predvar::probe::{feature_matrix, neuron_stats, FeatureMode};
use predvar::variation::{pv_table, value_pv};
use predvar::data::Label;

fn quick_config() -> TrainConfig {
    TrainConfig {
        max_epochs: 2,
        batch_size: 32,
        learning_rate: 1e-2,
        early_stopping: EarlyStopping {
            patience: 2,
            validation_fraction: 0.1,
        },
        optimizer: Optimizer::adam_default(),
    }
}

fn small_binary() -> Dataset<f64> {
    gen_synthetic_binary(300, 4, &[5, 5, 5], 21).unwrap()
}

#[test]
fn r0_ensemble_members_identical_and_pv_zero() {
    let data = small_binary();
    let parts = split(&data, &[0.7, 0.3], 3).unwrap();
    let spec = ModelSpec::binary_mlp(&data.schema).unwrap();
    let ens = train_ensemble(
        &spec,
        &quick_config(),
        &parts[0],
        RandomnessSetting::ALL[0],
        5,
        17,
        1,
    )
    .unwrap();
    for m in &ens.members[1..] {
        assert_eq!(m.params, ens.members[0].params, "R0 members must be bitwise identical");
    }
    let matrix = predict_matrix(&ens, &parts[1]).unwrap();
    let pv = pv_table(&matrix).unwrap();
    assert!(pv.rows.iter().all(|r| r.pv == 0.0), "R0 variation must be exactly zero");
}

#[test]
fn r1_members_differ_pairwise() {
    let data = small_binary();
    let spec = ModelSpec::binary_mlp(&data.schema).unwrap();
    let ens = train_ensemble(&spec, &quick_config(), &data, RandomnessSetting::ALL[1], 3, 17, 1).unwrap();
    for i in 0..ens.n() {
        for j in i + 1..ens.n() {
            assert_ne!(
                ens.members[i].params, ens.members[j].params,
                "members {i} and {j} should differ under random initialization"
            );
        }
    }
}

#[test]
fn worker_count_does_not_change_results() {
    let data = small_binary();
    let spec = ModelSpec::binary_mlp(&data.schema).unwrap();
    let serial = train_ensemble(&spec, &quick_config(), &data, RandomnessSetting::ALL[7], 4, 9, 1).unwrap();
    let parallel = train_ensemble(&spec, &quick_config(), &data, RandomnessSetting::ALL[7], 4, 9, 4).unwrap();
    for (a, b) in serial.members.iter().zip(&parallel.members) {
        assert_eq!(a.params, b.params);
        assert_eq!(a.bundle, b.bundle);
    }
}

#[test]
fn jackknife_setting_trains_on_distinct_subsets() {
    let data = small_binary();
    let spec = ModelSpec::binary_mlp(&data.schema).unwrap();
    let ens = train_ensemble(&spec, &quick_config(), &data, RandomnessSetting::ALL[4], 4, 9, 1).unwrap();
    // J only: identical init seeds, but different training rows -> different params
    for m in &ens.members {
        assert_eq!(m.bundle.init_seed, predvar::ensemble::FIXED_GLOBAL_INIT_SEED);
    }
    for i in 0..ens.n() {
        for j in i + 1..ens.n() {
            assert_ne!(ens.members[i].params, ens.members[j].params);
        }
    }
}

#[test]
fn matrix_shape_and_mean_predictions() {
    let data = small_binary();
    let parts = split(&data, &[0.8, 0.2], 5).unwrap();
    let spec = ModelSpec::binary_mlp(&data.schema).unwrap();
    let ens = train_ensemble(&spec, &quick_config(), &parts[0], RandomnessSetting::ALL[3], 3, 4, 1).unwrap();
    let matrix = predict_matrix(&ens, &parts[1]).unwrap();
    assert_eq!(matrix.n_members(), 3);
    assert_eq!(matrix.n_examples(), parts[1].len());
    let means = mean_predictions(&matrix);
    let labels: Vec<Label<f64>> = parts[1].rows.iter().map(|r| r.label).collect();
    let metrics = target_metrics(&means, &labels, TaskKind::Binary).unwrap();
    assert!(metrics.auc.unwrap() > 0.5, "ensemble should beat chance on learnable data");
}

#[test]
fn duplicated_member_rows_give_zero_pv() {
    let matrix = predvar::ensemble::PredictionMatrix::Value {
        row_ids: vec![0, 1],
        rows: vec![vec![0.25, 0.75], vec![0.25, 0.75]],
    };
    let pv = pv_table(&matrix).unwrap();
    assert!(pv.rows.iter().all(|r| r.pv == 0.0));
}

#[test]
fn probe_and_estimator_recover_signal() {
    // the ensemble's own disagreement should be somewhat predictable from
    // activations even at toy scale; weak signal still beats a corrupted one
    let data: Dataset<f64> = gen_synthetic_binary(1200, 6, &default_cat_cardinalities(8), 31).unwrap();
    let parts = split(&data, &[0.5, 0.25, 0.25], 7).unwrap();
    let spec = ModelSpec::binary_mlp(&data.schema).unwrap();
    let config = TrainConfig {
        max_epochs: 3,
        ..quick_config()
    };
    let ens = train_ensemble(&spec, &config, &parts[0], RandomnessSetting::ALL[3], 8, 2, 2).unwrap();

    let target = &ens.members[0];
    let stats = neuron_stats(&spec, &target.params, &parts[1]).unwrap();
    assert_eq!(stats.len(), spec.total_neurons());

    let (train_x, _) = feature_matrix(&spec, &target.params, &stats, &parts[1], FeatureMode::BV).unwrap();
    let (test_x, _) = feature_matrix(&spec, &target.params, &stats, &parts[2], FeatureMode::BV).unwrap();
    assert_eq!(train_x[0].len(), 2 * spec.total_neurons());

    let pv_train = pv_table(&predict_matrix(&ens, &parts[1]).unwrap()).unwrap();
    let pv_test = pv_table(&predict_matrix(&ens, &parts[2]).unwrap()).unwrap();

    let espec = EstimatorSpec {
        max_epochs: 30,
        ..EstimatorSpec::regression(FeatureMode::BV)
    };
    let model = train_regressor(&train_x, &pv_train.pvs(), &espec, 5).unwrap();
    let eval = eval_regression(&model, &test_x, &pv_test.pvs()).unwrap();
    // toy scale: just require a defined R2 and clamped, finite MSE
    assert!(eval.mse.is_finite());
    assert!(eval.r2.is_some());
}

#[test]
fn dropout_rate_zero_gives_zero_pv() {
    let data = small_binary();
    let parts = split(&data, &[0.8, 0.2], 2).unwrap();
    let spec = ModelSpec::binary_mlp(&data.schema).unwrap();
    let pv = mc_dropout_pv(&spec, &quick_config(), &parts[0], &parts[1], 0.0, 5, 3).unwrap();
    assert!(pv.rows.iter().all(|r| r.pv == 0.0));
}

#[test]
fn dropout_rate_positive_gives_positive_pv() {
    let data = small_binary();
    let parts = split(&data, &[0.8, 0.2], 2).unwrap();
    let spec = ModelSpec::binary_mlp(&data.schema).unwrap();
    let pv = mc_dropout_pv(&spec, &quick_config(), &parts[0], &parts[1], 0.2, 10, 3).unwrap();
    let positive = pv.rows.iter().filter(|r| r.pv > 0.0).count();
    assert!(positive > pv.len() / 2, "dropout passes should disagree");
    // comparing a table against itself is the degenerate upper bound
    let cmp = compare_pv(&pv, &pv).unwrap();
    assert_relative_eq!(cmp.pearson, 1.0, epsilon = 1e-12);
}

#[test]
fn movielens_pipeline_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let paths = write_movielens_like(dir.path(), 40, 30, 1500, 12).unwrap();
    let full: Dataset<f64> = load_movielens(&paths.ratings, &paths.users, &paths.movies).unwrap();
    let parts = split(&full, &[0.6, 0.4], 1).unwrap();

    // regression task
    let spec = ModelSpec::movielens_regression(&full.schema).unwrap();
    assert_eq!(spec.hidden_sizes, vec![50, 20, 10]);
    assert_eq!(spec.total_neurons(), 80);
    let config = quick_config();
    let ens = train_ensemble(&spec, &config, &parts[0], RandomnessSetting::ALL[2], 3, 8, 2).unwrap();
    let matrix = predict_matrix(&ens, &parts[1]).unwrap();
    let pv = pv_table(&matrix).unwrap();
    assert!(pv.rows.iter().any(|r| r.pv > 0.0), "shuffle randomness should induce variation");
    assert!(pv.rows.iter().all(|r| r.pv_coefficient.is_some()));

    // multiclass task over the same rows
    let mc = parts[0].to_task(TaskKind::Multiclass(5)).unwrap();
    let mc_valid = parts[1].to_task(TaskKind::Multiclass(5)).unwrap();
    let mc_spec = ModelSpec::movielens_multiclass(&full.schema).unwrap();
    assert_eq!(mc_spec.temperature, 0.2);
    let sweep = temperature_sweep(&mc_spec, &config, &mc, &mc_valid, &[0.7], 4).unwrap();
    assert_eq!(sweep.selected, 0.7, "single-value grid selects that value");
}

#[test]
fn r0_bundles_and_training_equivalence() {
    // the R0 matrix rows are identical, so every column has zero std
    let bundles = make_seed_bundles(RandomnessSetting::ALL[0], 4, 123);
    assert!(bundles.windows(2).all(|w| w[0] == w[1]));
    let col = [0.5f64; 4];
    assert_eq!(value_pv(&col).unwrap(), 0.0);
}
