//! Minimal deterministic neural-network engine: embedding lookups feeding a
//! fully connected ReLU stack with a regression, binary, or multi-class head.
//!
//! Parameters live in one flat buffer described by a [`ParamLayout`]; every
//! tensor is initialized from its own random stream keyed by
//! `(seed, segment path)`, so initialization does not depend on traversal
//! order anywhere else in the program.

pub mod gradcheck;
pub mod loss;
pub mod train;

use crate::data::{Dataset, Example, FeatureSchema, TaskKind};
use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::scalar::{c, Scalar};

/// One embedded categorical feature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddingSpec {
    pub feature_name: String,
    pub vocab_size: usize,
    pub embedding_dim: usize,
}

/// Architecture and head configuration of a model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec<T> {
    pub task: TaskKind,
    pub embeddings: Vec<EmbeddingSpec>,
    pub numeric_inputs: usize,
    pub hidden_sizes: Vec<usize>,
    /// Softmax temperature; must be 1 for regression/binary heads.
    pub temperature: T,
    /// Dropout rate on hidden-layer outputs; 0 disables dropout.
    pub dropout_rate: T,
    /// Optional output clamp for the regression head (used by the variation
    /// estimator); `None` leaves the head unbounded.
    pub output_clamp: Option<(T, T)>,
}

impl<T: Scalar> ModelSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_sizes.is_empty() {
            return Err(Error::Config("hidden_sizes must be non-empty".to_owned()));
        }
        if self.hidden_sizes.contains(&0) {
            return Err(Error::Config("hidden layer sizes must be positive".to_owned()));
        }
        for e in &self.embeddings {
            if e.vocab_size == 0 || e.embedding_dim == 0 {
                return Err(Error::Config(format!(
                    "embedding {:?} needs positive vocab and dim",
                    e.feature_name
                )));
            }
        }
        if self.input_dim() == 0 {
            return Err(Error::Config("model has no inputs".to_owned()));
        }
        if self.temperature <= T::zero() {
            return Err(Error::Config("temperature must be positive".to_owned()));
        }
        match self.task {
            TaskKind::Multiclass(classes) => {
                if classes < 2 {
                    return Err(Error::Config("multiclass needs >= 2 classes".to_owned()));
                }
            }
            _ => {
                if self.temperature != T::one() {
                    return Err(Error::Config(
                        "temperature must be 1 for regression/binary heads".to_owned(),
                    ));
                }
            }
        }
        if self.dropout_rate < T::zero() || self.dropout_rate >= T::one() {
            return Err(Error::Config("dropout_rate must be in [0, 1)".to_owned()));
        }
        if let Some((lo, hi)) = self.output_clamp {
            if self.task != TaskKind::Regression {
                return Err(Error::Config("output_clamp is only valid for regression".to_owned()));
            }
            #[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
            if !(hi > lo) {
                return Err(Error::Config("output_clamp upper must exceed lower".to_owned()));
            }
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.embeddings.iter().map(|e| e.embedding_dim).sum::<usize>() + self.numeric_inputs
    }

    pub fn total_neurons(&self) -> usize {
        self.hidden_sizes.iter().sum()
    }

    pub fn output_dim(&self) -> usize {
        match self.task {
            TaskKind::Multiclass(classes) => classes,
            _ => 1,
        }
    }

    /// Check that a dataset structurally matches this spec.
    pub fn check_schema(&self, schema: &FeatureSchema) -> Result<()> {
        if schema.categorical.len() != self.embeddings.len() {
            return Err(Error::Input(format!(
                "schema has {} categorical features, model embeds {}",
                schema.categorical.len(),
                self.embeddings.len()
            )));
        }
        for (feat, emb) in schema.categorical.iter().zip(&self.embeddings) {
            if feat.vocab > emb.vocab_size {
                return Err(Error::Input(format!(
                    "feature {:?}: vocab {} exceeds embedding table size {}",
                    feat.name, feat.vocab, emb.vocab_size
                )));
            }
        }
        if schema.numeric != self.numeric_inputs {
            return Err(Error::Input(format!(
                "schema has {} numeric features, model expects {}",
                schema.numeric, self.numeric_inputs
            )));
        }
        if schema.task != self.task {
            return Err(Error::Input(format!(
                "schema task {} does not match model task {}",
                schema.task.code(),
                self.task.code()
            )));
        }
        Ok(())
    }

    /// The MovieLens rating-regression preset: hidden [50, 20, 10], id
    /// embeddings of 8, age 3, occupation 5, gender 2.
    pub fn movielens_regression(schema: &FeatureSchema) -> Result<Self> {
        Self::movielens(schema, TaskKind::Regression, T::one())
    }

    /// The MovieLens 5-class preset (temperature 0.2).
    pub fn movielens_multiclass(schema: &FeatureSchema) -> Result<Self> {
        Self::movielens(schema, TaskKind::Multiclass(5), c(0.2))
    }

    fn movielens(schema: &FeatureSchema, task: TaskKind, temperature: T) -> Result<Self> {
        let embeddings = schema
            .categorical
            .iter()
            .map(|f| {
                let dim = match f.name.as_str() {
                    "user_id" | "movie_id" => 8,
                    "age" => 3,
                    "occupation" => 5,
                    _ => 2,
                };
                EmbeddingSpec {
                    feature_name: f.name.clone(),
                    vocab_size: f.vocab,
                    embedding_dim: dim,
                }
            })
            .collect();
        let spec = ModelSpec {
            task,
            embeddings,
            numeric_inputs: schema.numeric,
            hidden_sizes: vec![50, 20, 10],
            temperature,
            dropout_rate: T::zero(),
            output_clamp: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Binary click-prediction preset: every categorical feature embedded at
    /// dim 8, hidden [50, 20, 10].
    pub fn binary_mlp(schema: &FeatureSchema) -> Result<Self> {
        let embeddings = schema
            .categorical
            .iter()
            .map(|f| EmbeddingSpec {
                feature_name: f.name.clone(),
                vocab_size: f.vocab,
                embedding_dim: 8,
            })
            .collect();
        let spec = ModelSpec {
            task: TaskKind::Binary,
            embeddings,
            numeric_inputs: schema.numeric,
            hidden_sizes: vec![50, 20, 10],
            temperature: T::one(),
            dropout_rate: T::zero(),
            output_clamp: None,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// One named parameter tensor inside the flat buffer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub name: String,
    pub offset: usize,
    pub rows: usize,
    pub cols: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Flat parameter layout derived from a [`ModelSpec`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamLayout {
    pub segments: Vec<Segment>,
    pub total: usize,
}

impl ParamLayout {
    pub fn from_spec<T: Scalar>(spec: &ModelSpec<T>) -> Self {
        let mut segments = Vec::new();
        let mut offset = 0usize;
        let mut push = |name: String, rows: usize, cols: usize, offset: &mut usize| {
            segments.push(Segment {
                name,
                offset: *offset,
                rows,
                cols,
            });
            *offset += rows * cols;
        };
        for e in &spec.embeddings {
            push(format!("emb/{}", e.feature_name), e.vocab_size, e.embedding_dim, &mut offset);
        }
        let mut in_dim = spec.input_dim();
        for (l, &out) in spec.hidden_sizes.iter().enumerate() {
            push(format!("hidden/{l}/w"), out, in_dim, &mut offset);
            push(format!("hidden/{l}/b"), out, 1, &mut offset);
            in_dim = out;
        }
        push("head/w".to_owned(), spec.output_dim(), in_dim, &mut offset);
        push("head/b".to_owned(), spec.output_dim(), 1, &mut offset);
        ParamLayout {
            segments,
            total: offset,
        }
    }

    fn emb_index(&self, i: usize) -> usize {
        i
    }

    fn hidden_w_index(&self, n_emb: usize, l: usize) -> usize {
        n_emb + 2 * l
    }

    fn hidden_b_index(&self, n_emb: usize, l: usize) -> usize {
        n_emb + 2 * l + 1
    }
}

/// All weights of one model in a single flat buffer. Two values built from
/// the same spec and seed compare bitwise equal.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<T> {
    pub layout: ParamLayout,
    pub values: Vec<T>,
}

impl<T: Scalar> ModelParams<T> {
    pub fn zeros(spec: &ModelSpec<T>) -> ModelParams<T> {
        let layout = ParamLayout::from_spec(spec);
        let total = layout.total;
        ModelParams {
            layout,
            values: vec![T::zero(); total],
        }
    }

    pub fn segment(&self, index: usize) -> &[T] {
        let s = &self.layout.segments[index];
        &self.values[s.offset..s.offset + s.len()]
    }

    pub fn segment_mut(&mut self, index: usize) -> &mut [T] {
        let s = self.layout.segments[index].clone();
        &mut self.values[s.offset..s.offset + s.len()]
    }

    /// Check layout consistency against a spec (e.g. after artifact load).
    pub fn check_shapes(&self, spec: &ModelSpec<T>) -> Result<()> {
        let expect = ParamLayout::from_spec(spec);
        if expect != self.layout {
            return Err(Error::Input("parameter layout does not match spec".to_owned()));
        }
        if self.values.len() != self.layout.total {
            return Err(Error::Input(format!(
                "parameter buffer has {} values, layout expects {}",
                self.values.len(),
                self.layout.total
            )));
        }
        Ok(())
    }
}

/// Initialize parameters: weights from a fan-scaled uniform distribution
/// (limit `sqrt(6 / (fan_in + fan_out))`), biases zero. Each tensor draws
/// from its own stream keyed by `(seed, "init/<segment path>")`.
pub fn init_params<T: Scalar>(spec: &ModelSpec<T>, seed: u64) -> Result<ModelParams<T>> {
    spec.validate()?;
    let mut params = ModelParams::zeros(spec);
    for i in 0..params.layout.segments.len() {
        let seg = params.layout.segments[i].clone();
        if seg.name.ends_with("/b") {
            continue; // biases stay zero
        }
        let limit = (6.0 / (seg.rows + seg.cols) as f64).sqrt();
        let mut stream = Stream::new(seed, &format!("init/{}", seg.name));
        for v in params.segment_mut(i) {
            *v = T::from_f64_lossy(stream.next_range_f64(-limit, limit));
        }
    }
    Ok(params)
}

/// Model output.
#[derive(Debug, Clone, PartialEq)]
pub enum Prediction<T> {
    /// Regression value.
    Value(T),
    /// Binary positive-class probability.
    Probability(T),
    /// Multi-class distribution (sums to 1).
    Distribution(Vec<T>),
}

impl<T: Scalar> Prediction<T> {
    /// Scalar view for value tasks (regression value or binary probability).
    pub fn as_scalar(&self) -> Option<T> {
        match self {
            Prediction::Value(v) | Prediction::Probability(v) => Some(*v),
            Prediction::Distribution(_) => None,
        }
    }

    pub fn as_distribution(&self) -> Option<&[T]> {
        match self {
            Prediction::Distribution(d) => Some(d),
            _ => None,
        }
    }
}

/// Everything the backward pass needs from one forward evaluation.
pub struct ForwardTrace<T> {
    pub input: Vec<T>,
    pub pre: Vec<Vec<T>>,
    pub post: Vec<Vec<T>>,
    pub logits: Vec<T>,
}

fn assemble_input<T: Scalar>(
    spec: &ModelSpec<T>,
    params: &ModelParams<T>,
    example: &Example<T>,
) -> Result<Vec<T>> {
    if example.categorical.len() != spec.embeddings.len() {
        return Err(Error::Input(format!(
            "row {}: expected {} categorical ids, got {}",
            example.row_id,
            spec.embeddings.len(),
            example.categorical.len()
        )));
    }
    if example.numeric.len() != spec.numeric_inputs {
        return Err(Error::Input(format!(
            "row {}: expected {} numeric inputs, got {}",
            example.row_id,
            spec.numeric_inputs,
            example.numeric.len()
        )));
    }
    let mut input = Vec::with_capacity(spec.input_dim());
    for (i, (emb, &id)) in spec.embeddings.iter().zip(&example.categorical).enumerate() {
        if id >= emb.vocab_size {
            return Err(Error::Input(format!(
                "row {}: id {} out of range for embedding {:?} (vocab {})",
                example.row_id, id, emb.feature_name, emb.vocab_size
            )));
        }
        let table = params.segment(params.layout.emb_index(i));
        input.extend_from_slice(&table[id * emb.embedding_dim..(id + 1) * emb.embedding_dim]);
    }
    input.extend_from_slice(&example.numeric);
    Ok(input)
}

/// Full forward pass. `dropout_masks`, when given, multiplies each hidden
/// layer's post-ReLU output elementwise (inverted-dropout masks carry the
/// `1/(1-rate)` scale).
pub fn forward_trace<T: Scalar>(
    spec: &ModelSpec<T>,
    params: &ModelParams<T>,
    example: &Example<T>,
    dropout_masks: Option<&[Vec<T>]>,
) -> Result<ForwardTrace<T>> {
    let input = assemble_input(spec, params, example)?;
    let n_emb = spec.embeddings.len();
    let n_layers = spec.hidden_sizes.len();
    let mut pre = Vec::with_capacity(n_layers);
    let mut post = Vec::with_capacity(n_layers);
    let mut x: &[T] = &input;
    for l in 0..n_layers {
        let out = spec.hidden_sizes[l];
        let w = params.segment(params.layout.hidden_w_index(n_emb, l));
        let b = params.segment(params.layout.hidden_b_index(n_emb, l));
        let in_dim = x.len();
        let mut z = Vec::with_capacity(out);
        for o in 0..out {
            let mut acc = b[o];
            let row = &w[o * in_dim..(o + 1) * in_dim];
            for (wi, xi) in row.iter().zip(x) {
                acc += *wi * *xi;
            }
            z.push(acc);
        }
        let mut a: Vec<T> = z.iter().map(|&v| if v > T::zero() { v } else { T::zero() }).collect();
        if let Some(masks) = dropout_masks {
            for (ai, mi) in a.iter_mut().zip(&masks[l]) {
                *ai *= *mi;
            }
        }
        pre.push(z);
        post.push(a);
        x = &post[l];
    }
    let out_dim = spec.output_dim();
    let w = params.segment(params.layout.segments.len() - 2);
    let b = params.segment(params.layout.segments.len() - 1);
    let in_dim = x.len();
    let mut logits = Vec::with_capacity(out_dim);
    for o in 0..out_dim {
        let mut acc = b[o];
        let row = &w[o * in_dim..(o + 1) * in_dim];
        for (wi, xi) in row.iter().zip(x) {
            acc += *wi * *xi;
        }
        logits.push(acc);
    }
    Ok(ForwardTrace {
        input,
        pre,
        post,
        logits,
    })
}

/// Numerically stable sigmoid.
pub fn sigmoid<T: Scalar>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

/// Softmax of `logits / temperature`, computed via max subtraction.
pub fn softmax_with_temperature<T: Scalar>(logits: &[T], temperature: T) -> Vec<T> {
    let scaled: Vec<T> = logits.iter().map(|&z| z / temperature).collect();
    let m = scaled.iter().cloned().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = scaled.iter().map(|&s| (s - m).exp()).collect();
    let total: T = exps.iter().cloned().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Head applied to the logits of a trace.
pub fn predict_from_logits<T: Scalar>(spec: &ModelSpec<T>, logits: &[T]) -> Prediction<T> {
    match spec.task {
        TaskKind::Regression => {
            let mut v = logits[0];
            if let Some((lo, hi)) = spec.output_clamp {
                v = v.max(lo).min(hi);
            }
            Prediction::Value(v)
        }
        TaskKind::Binary => Prediction::Probability(sigmoid(logits[0])),
        TaskKind::Multiclass(_) => {
            Prediction::Distribution(softmax_with_temperature(logits, spec.temperature))
        }
    }
}

/// Inference-time forward pass. With `capture`, also returns the raw
/// (pre-normalization, dropout-free) post-ReLU output of every hidden neuron
/// in layer order; its length equals `spec.total_neurons()`.
pub fn forward<T: Scalar>(
    spec: &ModelSpec<T>,
    params: &ModelParams<T>,
    example: &Example<T>,
    capture: bool,
) -> Result<(Prediction<T>, Option<Vec<T>>)> {
    let trace = forward_trace(spec, params, example, None)?;
    let prediction = predict_from_logits(spec, &trace.logits);
    let captured = capture.then(|| {
        let mut all = Vec::with_capacity(spec.total_neurons());
        for layer in &trace.post {
            all.extend_from_slice(layer);
        }
        all
    });
    Ok((prediction, captured))
}

/// Forward + backward for one labelled example; accumulates
/// `d(loss)/d(param)` into `grads` and returns the example loss.
pub fn backward<T: Scalar>(
    spec: &ModelSpec<T>,
    params: &ModelParams<T>,
    example: &Example<T>,
    dropout_masks: Option<&[Vec<T>]>,
    grads: &mut ModelParams<T>,
) -> Result<T> {
    let trace = forward_trace(spec, params, example, dropout_masks)?;
    backward_with_trace(spec, params, example, &trace, dropout_masks, grads)
}

/// Backward pass when the forward trace is already available.
pub fn backward_with_trace<T: Scalar>(
    spec: &ModelSpec<T>,
    params: &ModelParams<T>,
    example: &Example<T>,
    trace: &ForwardTrace<T>,
    dropout_masks: Option<&[Vec<T>]>,
    grads: &mut ModelParams<T>,
) -> Result<T> {
    let (loss_value, mut d_logits) = loss::loss_and_dlogits(spec, &trace.logits, &example.label)?;

    let n_emb = spec.embeddings.len();
    let n_layers = spec.hidden_sizes.len();
    let head_w_idx = params.layout.segments.len() - 2;
    let head_b_idx = params.layout.segments.len() - 1;

    let last_post = &trace.post[n_layers - 1];
    let in_dim = last_post.len();
    {
        let gw = grads.segment_mut(head_w_idx);
        for (o, &d) in d_logits.iter().enumerate() {
            let row = &mut gw[o * in_dim..(o + 1) * in_dim];
            for (g, &a) in row.iter_mut().zip(last_post) {
                *g += d * a;
            }
        }
        let gb = grads.segment_mut(head_b_idx);
        for (g, &d) in gb.iter_mut().zip(&d_logits) {
            *g += d;
        }
    }
    let head_w = params.segment(head_w_idx);
    let mut d_post = vec![T::zero(); in_dim];
    for (o, &d) in d_logits.iter().enumerate() {
        let row = &head_w[o * in_dim..(o + 1) * in_dim];
        for (dp, &w) in d_post.iter_mut().zip(row) {
            *dp += w * d;
        }
    }
    d_logits.clear();

    for l in (0..n_layers).rev() {
        let pre = &trace.pre[l];
        let below: &[T] = if l == 0 { &trace.input } else { &trace.post[l - 1] };
        let mut d_pre = d_post;
        for (o, d) in d_pre.iter_mut().enumerate() {
            if let Some(masks) = dropout_masks {
                *d *= masks[l][o];
            }
            if pre[o] <= T::zero() {
                *d = T::zero();
            }
        }
        let in_dim = below.len();
        {
            let gw = grads.segment_mut(grads.layout.hidden_w_index(n_emb, l));
            for (o, &d) in d_pre.iter().enumerate() {
                if d == T::zero() {
                    continue;
                }
                let row = &mut gw[o * in_dim..(o + 1) * in_dim];
                for (g, &x) in row.iter_mut().zip(below) {
                    *g += d * x;
                }
            }
            let gb = grads.segment_mut(grads.layout.hidden_b_index(n_emb, l));
            for (g, &d) in gb.iter_mut().zip(&d_pre) {
                *g += d;
            }
        }
        let w = params.segment(params.layout.hidden_w_index(n_emb, l));
        let mut d_below = vec![T::zero(); in_dim];
        for (o, &d) in d_pre.iter().enumerate() {
            if d == T::zero() {
                continue;
            }
            let row = &w[o * in_dim..(o + 1) * in_dim];
            for (db, &wi) in d_below.iter_mut().zip(row) {
                *db += wi * d;
            }
        }
        d_post = d_below;
    }

    let mut offset = 0usize;
    for (i, emb) in spec.embeddings.iter().enumerate() {
        let id = example.categorical[i];
        let table = grads.segment_mut(grads.layout.emb_index(i));
        let row = &mut table[id * emb.embedding_dim..(id + 1) * emb.embedding_dim];
        for (g, &d) in row.iter_mut().zip(&d_post[offset..offset + emb.embedding_dim]) {
            *g += d;
        }
        offset += emb.embedding_dim;
    }

    Ok(loss_value)
}

/// Predictions for a whole dataset, in row order.
pub fn predict_dataset<T: Scalar>(
    spec: &ModelSpec<T>,
    params: &ModelParams<T>,
    data: &Dataset<T>,
) -> Result<Vec<Prediction<T>>> {
    data.rows
        .iter()
        .map(|ex| forward(spec, params, ex, false).map(|(p, _)| p))
        .collect()
}
