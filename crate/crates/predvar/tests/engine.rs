//! Engine-level tests: initialization determinism, forward-pass oracles,
//! gradient checks against finite differences, and training behavior.

use approx::assert_relative_eq;
use predvar::data::{
    synthetic::gen_synthetic_binary, CategoricalFeature, Dataset, Example, FeatureSchema, Label,
    Provenance, TaskKind,
};
use predvar::nn::{
    forward, gradcheck::{grad_check, grad_check_against, min_kink_distance},
    init_params, loss::loss,
    train::{prediction_in_range, train, EarlyStopping, Optimizer, TrainConfig, TrainSeeds},
    ModelParams, ModelSpec, Prediction,
};
use predvar::rng::Stream;

fn tiny_spec(task: TaskKind, temperature: f64) -> ModelSpec<f64> {
    ModelSpec {
        task,
        embeddings: vec![predvar::nn::EmbeddingSpec {
            feature_name: "id".to_owned(),
            vocab_size: 5,
            embedding_dim: 3,
        }],
        numeric_inputs: 2,
        hidden_sizes: vec![4, 3],
        temperature,
        dropout_rate: 0.0,
        output_clamp: None,
    }
}

fn tiny_example(task: TaskKind, stream: &mut Stream) -> Example<f64> {
    let label = match task {
        TaskKind::Regression => Label::Value(1.0 + stream.next_below(5) as f64),
        TaskKind::Binary => Label::Value(stream.next_below(2) as f64),
        TaskKind::Multiclass(c) => Label::Class(stream.next_below(c as u64) as usize),
    };
    Example {
        row_id: 0,
        categorical: vec![stream.next_below(5) as usize],
        numeric: vec![stream.next_standard_normal(), stream.next_standard_normal()],
        label,
    }
}

#[test]
fn init_is_deterministic_per_seed() {
    let spec = tiny_spec(TaskKind::Regression, 1.0);
    let a = init_params(&spec, 7).unwrap();
    let b = init_params(&spec, 7).unwrap();
    assert_eq!(a, b, "same (spec, seed) must be bitwise identical");
    let c = init_params(&spec, 8).unwrap();
    assert_ne!(a.values, c.values, "different seeds must differ somewhere");
}

#[test]
fn init_biases_are_zero() {
    let spec = tiny_spec(TaskKind::Multiclass(3), 0.2);
    let params = init_params(&spec, 3).unwrap();
    for (i, seg) in params.layout.segments.iter().enumerate() {
        if seg.name.ends_with("/b") {
            assert!(params.segment(i).iter().all(|v| *v == 0.0), "{} not zero", seg.name);
        } else {
            assert!(params.segment(i).iter().any(|v| *v != 0.0), "{} all zero", seg.name);
        }
    }
}

#[test]
fn init_rejects_invalid_specs() {
    let mut spec = tiny_spec(TaskKind::Regression, 1.0);
    spec.hidden_sizes = vec![4, 0];
    assert!(init_params(&spec, 1).is_err());
    let mut spec = tiny_spec(TaskKind::Regression, 1.0);
    spec.embeddings[0].vocab_size = 0;
    assert!(init_params(&spec, 1).is_err());
}

#[test]
fn multiclass_uniform_logits_give_uniform_distribution() {
    // zero params -> all logits 0 -> uniform regardless of temperature
    for temperature in [0.1, 0.2, 1.0, 10.0] {
        let mut spec = tiny_spec(TaskKind::Multiclass(5), 1.0);
        spec.temperature = temperature;
        let params = ModelParams::zeros(&spec);
        let ex = tiny_example(spec.task, &mut Stream::new(1, "ex"));
        let (pred, _) = forward(&spec, &params, &ex, false).unwrap();
        let dist = pred.as_distribution().unwrap();
        for p in dist {
            assert_relative_eq!(*p, 0.2, epsilon = 1e-12);
        }
    }
}

#[test]
fn binary_zero_logit_gives_half() {
    let spec = tiny_spec(TaskKind::Binary, 1.0);
    let params = ModelParams::zeros(&spec);
    let ex = tiny_example(spec.task, &mut Stream::new(2, "ex"));
    let (pred, _) = forward(&spec, &params, &ex, false).unwrap();
    assert_eq!(pred.as_scalar().unwrap(), 0.5);
}

#[test]
fn softmax_temperature_worked_example() {
    // logits (1, 0) at temperature 0.5 -> softmax(2, 0) = (e^2/(e^2+1), ...)
    let dist = predvar::nn::softmax_with_temperature(&[1.0, 0.0], 0.5);
    assert_relative_eq!(dist[0], 0.8808, epsilon = 1e-4);
    assert_relative_eq!(dist[1], 0.1192, epsilon = 1e-4);
}

#[test]
fn capture_matches_relu_semantics() {
    let spec = tiny_spec(TaskKind::Regression, 1.0);
    let params = init_params(&spec, 11).unwrap();
    let mut stream = Stream::new(3, "capture");
    for _ in 0..20 {
        let ex = tiny_example(spec.task, &mut stream);
        let (_, captured) = forward(&spec, &params, &ex, true).unwrap();
        let raw = captured.unwrap();
        assert_eq!(raw.len(), spec.total_neurons());
        assert!(raw.iter().all(|v| *v >= 0.0), "post-ReLU outputs are non-negative");
    }
}

#[test]
fn out_of_vocab_id_is_input_error() {
    let spec = tiny_spec(TaskKind::Regression, 1.0);
    let params = init_params(&spec, 1).unwrap();
    let ex = Example {
        row_id: 0,
        categorical: vec![5],
        numeric: vec![0.0, 0.0],
        label: Label::Value(1.0),
    };
    assert!(matches!(
        forward(&spec, &params, &ex, false),
        Err(predvar::Error::Input(_))
    ));
}

#[test]
fn gradient_zero_at_exact_minimum() {
    // zero-weight regression net predicts 0; label 0 sits at the minimum
    let spec = tiny_spec(TaskKind::Regression, 1.0);
    let params = ModelParams::zeros(&spec);
    let ex = Example {
        row_id: 0,
        categorical: vec![1],
        numeric: vec![0.3, -0.2],
        label: Label::Value(0.0),
    };
    let err = grad_check(&spec, &params, &ex, 1e-5).unwrap();
    assert!(err < 1e-8, "max relative error {err}");
}

#[test]
fn grad_check_all_heads_small_nets() {
    let tasks = [TaskKind::Regression, TaskKind::Binary, TaskKind::Multiclass(4)];
    let mut stream = Stream::new(17, "gradcheck");
    for (i, &task) in tasks.iter().enumerate() {
        let temperature = if matches!(task, TaskKind::Multiclass(_)) { 0.5 } else { 1.0 };
        let spec = tiny_spec(task, temperature);
        let params = init_params(&spec, 100 + i as u64).unwrap();
        let mut checked = 0;
        while checked < 5 {
            let ex = tiny_example(task, &mut stream);
            // finite differences are one-sided at a ReLU kink; skip inputs
            // sitting on one
            if min_kink_distance(&spec, &params, &ex).unwrap() <= 1e-3 {
                continue;
            }
            let err = grad_check(&spec, &params, &ex, 1e-5).unwrap();
            assert!(err < 1e-4, "task {task:?}: max relative error {err}");
            checked += 1;
        }
    }
}

#[test]
fn corrupted_gradient_is_detected() {
    let spec = tiny_spec(TaskKind::Regression, 1.0);
    let params = init_params(&spec, 23).unwrap();
    let ex = tiny_example(spec.task, &mut Stream::new(9, "neg"));
    let mut grads = ModelParams::zeros(&spec);
    predvar::nn::backward(&spec, &params, &ex, None, &mut grads).unwrap();
    // flip the sign of the largest-magnitude gradient entry
    let (ix, _) = grads
        .values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
        .unwrap();
    grads.values[ix] = -grads.values[ix];
    let err = grad_check_against(&spec, &params, &ex, 1e-5, &grads).unwrap();
    assert!(err > 1e-2, "sign flip must be detected, got {err}");
}

#[test]
fn temperature_monotonicity_on_max_class() {
    // decreasing T strictly increases the max-class probability for any
    // non-uniform logit vector
    let logits = [0.7, -0.3, 0.1, 0.2];
    let mut previous = 0.0;
    for temperature in [5.0, 2.0, 1.0, 0.5, 0.2, 0.1] {
        let dist = predvar::nn::softmax_with_temperature(&logits, temperature);
        let max = dist.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(max > previous, "T={temperature}: max {max} not above {previous}");
        previous = max;
    }
}

#[test]
fn multiclass_distribution_sums_to_one() {
    let spec = tiny_spec(TaskKind::Multiclass(5), 0.2);
    let params = init_params(&spec, 5).unwrap();
    let mut stream = Stream::new(8, "sum1");
    for _ in 0..50 {
        let ex = tiny_example(spec.task, &mut stream);
        let (pred, _) = forward(&spec, &params, &ex, false).unwrap();
        assert!(prediction_in_range(&spec, &pred));
    }
}

fn binary_toy_dataset(n: usize, seed: u64) -> Dataset<f64> {
    gen_synthetic_binary(n, 4, &[3, 3], seed).unwrap()
}

fn small_config(epochs: usize) -> TrainConfig {
    TrainConfig {
        max_epochs: epochs,
        batch_size: 16,
        learning_rate: 1e-2,
        early_stopping: EarlyStopping {
            patience: 2,
            validation_fraction: 0.1,
        },
        optimizer: Optimizer::adam_default(),
    }
}

#[test]
fn training_is_bitwise_deterministic() {
    let data = binary_toy_dataset(200, 4);
    let spec = ModelSpec::binary_mlp(&data.schema).unwrap();
    let config = small_config(3);
    let seeds = TrainSeeds {
        init: 5,
        shuffle: Some(6),
        dropout: None,
    };
    let (a, ha) = train(&spec, &config, &data, &seeds).unwrap();
    let (b, hb) = train(&spec, &config, &data, &seeds).unwrap();
    assert_eq!(a, b, "identical runs must produce bitwise-identical params");
    assert_eq!(ha, hb);
}

#[test]
fn training_reduces_loss_on_learnable_data() {
    let data = binary_toy_dataset(400, 7);
    let spec = ModelSpec::binary_mlp(&data.schema).unwrap();
    let config = small_config(1);
    let seeds = TrainSeeds::fixed(3);
    let initial = init_params(&spec, seeds.init).unwrap();
    let initial_loss =
        predvar::nn::train::mean_loss_over(&spec, &initial, &data.rows[..360]).unwrap();
    let (_, history) = train(&spec, &config, &data, &seeds).unwrap();
    assert!(
        history.epochs[0].train_loss < initial_loss,
        "training loss {} did not improve on {initial_loss}",
        history.epochs[0].train_loss
    );
}

#[test]
fn early_stopping_restores_best_epoch() {
    let data = binary_toy_dataset(300, 9);
    let spec = ModelSpec::binary_mlp(&data.schema).unwrap();
    // aggressive lr so validation loss eventually worsens
    let config = TrainConfig {
        max_epochs: 30,
        learning_rate: 0.05,
        ..small_config(30)
    };
    let seeds = TrainSeeds {
        init: 2,
        shuffle: Some(11),
        dropout: None,
    };
    let (params, history) = train(&spec, &config, &data, &seeds).unwrap();
    let n_valid = (data.len() as f64 * 0.1).floor() as usize;
    let valid = &data.rows[data.len() - n_valid..];
    let final_valid = predvar::nn::train::mean_loss_over(&spec, &params, valid).unwrap();
    assert_relative_eq!(
        final_valid,
        history.epochs[history.best_epoch].valid_loss,
        epsilon = 1e-12
    );
    for e in &history.epochs {
        assert!(e.valid_loss >= history.epochs[history.best_epoch].valid_loss);
    }
}

#[test]
fn divergence_reports_epoch_and_batch() {
    // regression squared error overflows once the weights explode
    let schema = FeatureSchema {
        categorical: vec![],
        numeric: 2,
        task: TaskKind::Regression,
    };
    let rows = (0..100)
        .map(|i| Example {
            row_id: i,
            categorical: vec![],
            numeric: vec![(i % 7) as f64, (i % 3) as f64],
            label: Label::Value(1.0 + (i % 5) as f64),
        })
        .collect();
    let data = Dataset::new(schema, rows, Provenance::default()).unwrap();
    let spec = ModelSpec::<f64> {
        task: TaskKind::Regression,
        embeddings: vec![],
        numeric_inputs: 2,
        hidden_sizes: vec![4, 3],
        temperature: 1.0,
        dropout_rate: 0.0,
        output_clamp: None,
    };
    let config = TrainConfig {
        learning_rate: 1e200,
        ..small_config(5)
    };
    match train(&spec, &config, &data, &TrainSeeds::fixed(1)) {
        Err(predvar::Error::Training { epoch, .. }) => assert_eq!(epoch, 0),
        other => panic!("expected a training error, got {other:?}"),
    }
}

#[test]
fn loss_worked_examples() {
    let spec = tiny_spec(TaskKind::Regression, 1.0);
    assert_eq!(loss(&spec, &[3.0], &Label::Value(3.0)).unwrap(), 0.0);
    let spec = tiny_spec(TaskKind::Binary, 1.0);
    assert_relative_eq!(
        loss(&spec, &[0.0], &Label::Value(1.0)).unwrap(),
        (2.0f64).ln(),
        epsilon = 1e-12
    );
    let spec = tiny_spec(TaskKind::Multiclass(2), 1.0);
    assert_relative_eq!(
        loss(&spec, &[0.0, 0.0], &Label::Class(0)).unwrap(),
        (2.0f64).ln(),
        epsilon = 1e-12
    );
}

#[test]
fn engine_is_scalar_generic() {
    // the same architecture runs in f32
    let spec = ModelSpec::<f32> {
        task: TaskKind::Binary,
        embeddings: vec![],
        numeric_inputs: 2,
        hidden_sizes: vec![3],
        temperature: 1.0,
        dropout_rate: 0.0,
        output_clamp: None,
    };
    let params = init_params(&spec, 1).unwrap();
    let ex = Example::<f32> {
        row_id: 0,
        categorical: vec![],
        numeric: vec![0.5, -0.5],
        label: Label::Value(1.0),
    };
    let (pred, _) = forward(&spec, &params, &ex, false).unwrap();
    match pred {
        Prediction::Probability(p) => assert!(p > 0.0 && p < 1.0),
        other => panic!("unexpected prediction {other:?}"),
    }
}

#[test]
fn dataset_schema_mismatch_is_rejected() {
    let data = binary_toy_dataset(50, 1);
    let schema = FeatureSchema {
        categorical: vec![CategoricalFeature {
            name: "other".to_owned(),
            vocab: 10,
        }],
        numeric: 1,
        task: TaskKind::Regression,
    };
    let other = Dataset::<f64>::new(
        schema,
        vec![Example {
            row_id: 0,
            categorical: vec![0],
            numeric: vec![0.0],
            label: Label::Value(1.0),
        }],
        Provenance::default(),
    )
    .unwrap();
    let spec = ModelSpec::binary_mlp(&data.schema).unwrap();
    let config = small_config(1);
    assert!(train(&spec, &config, &other, &TrainSeeds::fixed(1)).is_err());
}
