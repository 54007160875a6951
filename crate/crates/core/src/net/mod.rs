//! The 12-200-26 sigmoid feed-forward classifier.
//!
//! Training is online backpropagation on half the sum squared error with a
//! momentum term: every weight moves by `-lr * gradient + momentum * previous_delta`.

mod model_file;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{FeatureVector, SECTORS};

pub use model_file::{load_model, read_model, save_model, write_model, ModelFileError, MAGIC, VERSION};

pub const INPUTS: usize = SECTORS;
pub const HIDDEN: usize = 200;
pub const OUTPUTS: usize = 26;
pub const NEURONS: usize = INPUTS + HIDDEN + OUTPUTS;
pub const PARAMETERS: usize = HIDDEN * INPUTS + HIDDEN + OUTPUTS * HIDDEN + OUTPUTS;

/// Class tags in output order.
pub const ALPHABET: [u8; OUTPUTS] = *b"ABCDEFGHIJKLMNOPQRSTUVWXYZ";

pub fn class_of(tag: char) -> Option<usize> {
    tag.is_ascii_uppercase().then(|| (tag as u8 - b'A') as usize)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetError {
    #[error("training set is empty")]
    EmptyDataset,
    #[error("a weight became non-finite at epoch {epoch}")]
    DivergedToNonFinite { epoch: usize },
    #[error("input vector {0} has zero norm")]
    ZeroInputVector(usize),
    #[error("no patterns given")]
    NoPatterns,
    #[error("invalid training configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("class index {0} out of range")]
    BadClass(usize),
}

impl NetError {
    pub fn name(&self) -> &'static str {
        match self {
            NetError::EmptyDataset => "EmptyDataset",
            NetError::DivergedToNonFinite { .. } => "DivergedToNonFinite",
            NetError::ZeroInputVector(_) => "ZeroInputVector",
            NetError::NoPatterns => "NoPatterns",
            NetError::InvalidConfig(_) => "InvalidConfig",
            NetError::BadClass(_) => "BadClass",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub max_epochs: usize,
    pub target_sse: f64,
    pub seed: u64,
    pub target_hi: f64,
    pub target_lo: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.10,
            momentum: 0.10,
            max_epochs: 4000,
            target_sse: 0.01,
            seed: 1,
            target_hi: 0.9,
            target_lo: 0.1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), NetError> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(NetError::InvalidConfig("learning_rate must be > 0"));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(NetError::InvalidConfig("momentum must be in [0, 1)"));
        }
        if self.max_epochs == 0 {
            return Err(NetError::InvalidConfig("max_epochs must be >= 1"));
        }
        // Written negated so NaN targets are rejected too.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(self.target_lo < self.target_hi) {
            return Err(NetError::InvalidConfig("target_lo must be below target_hi"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs_run: usize,
    pub final_sse: f64,
    pub sse_history: Vec<f64>,
    pub stopped_early: bool,
}

/// Weights of the network. Matrices are row-major with one row per
/// destination neuron.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    /// `HIDDEN × INPUTS`
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    /// `OUTPUTS × HIDDEN`
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    pub labels: [u8; OUTPUTS],
}

impl MlpModel {
    pub fn zeros() -> Self {
        Self {
            w1: vec![0.0; HIDDEN * INPUTS],
            b1: vec![0.0; HIDDEN],
            w2: vec![0.0; OUTPUTS * HIDDEN],
            b2: vec![0.0; OUTPUTS],
            labels: ALPHABET,
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (INPUTS, HIDDEN, OUTPUTS)
    }

    pub fn parameter_count(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    pub fn is_finite(&self) -> bool {
        self.params().all(f64::is_finite)
    }

    /// All parameters in file order: w1, b1, w2, b2.
    pub fn params(&self) -> impl Iterator<Item = f64> + '_ {
        self.w1.iter().chain(&self.b1).chain(&self.w2).chain(&self.b2).copied()
    }

    #[cfg(test)]
    fn param_mut(&mut self, i: usize) -> &mut f64 {
        let (a, b, c) = (self.w1.len(), self.b1.len(), self.w2.len());
        match i {
            i if i < a => &mut self.w1[i],
            i if i < a + b => &mut self.b1[i - a],
            i if i < a + b + c => &mut self.w2[i - a - b],
            i => &mut self.b2[i - a - b - c],
        }
    }
}

/// Uniform `[-0.5, 0.5]` weights from a seeded generator; zero biases.
pub fn init_random(cfg: &TrainConfig) -> MlpModel {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut m = MlpModel::zeros();
    for w in m.w1.iter_mut().chain(m.w2.iter_mut()) {
        *w = rng.gen_range(-0.5..=0.5);
    }
    m
}

/// Dense row-major matrix, used for the linear pattern associator.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        self.data.chunks(self.cols).map(|row| dot(row, v)).collect()
    }
}

/// Analytic weights of a linear associator mapping input vectors to targets:
/// the sum over patterns of `target ⊗ input / ‖input‖`.
///
/// The division is by the norm, not its square, so recall is exact only for
/// unit-length orthogonal inputs.
pub fn hebbian_init(patterns: &[([f64; INPUTS], [f64; OUTPUTS])]) -> Result<Matrix, NetError> {
    if patterns.is_empty() {
        return Err(NetError::NoPatterns);
    }
    let mut w = Matrix::zeros(OUTPUTS, INPUTS);
    for (p, (iv, tv)) in patterns.iter().enumerate() {
        let norm = dot(iv, iv).sqrt();
        if norm == 0.0 {
            return Err(NetError::ZeroInputVector(p));
        }
        for (r, t) in tv.iter().enumerate() {
            for (c, i) in iv.iter().enumerate() {
                w.data[r * INPUTS + c] += t * i / norm;
            }
        }
    }
    Ok(w)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Hidden and output activations for one input.
struct Activations {
    hidden: [f64; HIDDEN],
    output: [f64; OUTPUTS],
}

fn activate(m: &MlpModel, x: &[f64; INPUTS]) -> Activations {
    let mut hidden = [0.0; HIDDEN];
    for (j, row) in m.w1.chunks_exact(INPUTS).enumerate() {
        hidden[j] = sigmoid(dot(row, x) + m.b1[j]);
    }
    let mut output = [0.0; OUTPUTS];
    for (k, row) in m.w2.chunks_exact(HIDDEN).enumerate() {
        output[k] = sigmoid(dot(row, &hidden) + m.b2[k]);
    }
    Activations { hidden, output }
}

pub fn forward(m: &MlpModel, x: &FeatureVector) -> [f64; OUTPUTS] {
    activate(m, &x.0).output
}

/// Arg-max class (lowest index on ties) and its raw activation.
pub fn classify(m: &MlpModel, x: &FeatureVector) -> (char, f64) {
    let out = forward(m, x);
    let k = argmax(&out);
    (m.labels[k] as char, out[k])
}

pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn targets(class: usize, cfg: &TrainConfig) -> [f64; OUTPUTS] {
    let mut t = [cfg.target_lo; OUTPUTS];
    t[class] = cfg.target_hi;
    t
}

/// Gradient of `½ Σ (o − t)²` with respect to every parameter, in file order.
pub fn gradient(m: &MlpModel, x: &FeatureVector, target: &[f64; OUTPUTS]) -> Vec<f64> {
    let mut g = Gradient::zeros();
    g.accumulate(m, &x.0, target);
    g.into_flat()
}

struct Gradient {
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: Vec<f64>,
}

impl Gradient {
    fn zeros() -> Self {
        Self {
            w1: vec![0.0; HIDDEN * INPUTS],
            b1: vec![0.0; HIDDEN],
            w2: vec![0.0; OUTPUTS * HIDDEN],
            b2: vec![0.0; OUTPUTS],
        }
    }

    /// Adds one sample's gradient and returns its squared error.
    fn accumulate(&mut self, m: &MlpModel, x: &[f64; INPUTS], target: &[f64; OUTPUTS]) -> f64 {
        let act = activate(m, x);
        let mut sse = 0.0;
        // Error derivative with respect to each output unit's total input.
        let mut d_out = [0.0; OUTPUTS];
        for k in 0..OUTPUTS {
            let o = act.output[k];
            let e = o - target[k];
            sse += e * e;
            d_out[k] = e * o * (1.0 - o);
        }
        // Back through w2 to the hidden activities, then to hidden total inputs.
        let mut d_hid = [0.0; HIDDEN];
        for (k, row) in m.w2.chunks_exact(HIDDEN).enumerate() {
            for (d, w) in d_hid.iter_mut().zip(row) {
                *d += d_out[k] * w;
            }
        }
        for (d, h) in d_hid.iter_mut().zip(&act.hidden) {
            *d *= h * (1.0 - h);
        }
        for (k, row) in self.w2.chunks_exact_mut(HIDDEN).enumerate() {
            for (g, h) in row.iter_mut().zip(&act.hidden) {
                *g += d_out[k] * h;
            }
            self.b2[k] += d_out[k];
        }
        for (j, row) in self.w1.chunks_exact_mut(INPUTS).enumerate() {
            for (g, xi) in row.iter_mut().zip(x) {
                *g += d_hid[j] * xi;
            }
            self.b1[j] += d_hid[j];
        }
        sse
    }

    fn into_flat(self) -> Vec<f64> {
        let mut v = self.w1;
        v.extend(self.b1);
        v.extend(self.w2);
        v.extend(self.b2);
        v
    }
}

/// Momentum buffers, one per parameter block.
struct Velocity {
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: Vec<f64>,
}

fn step(params: &mut [f64], grads: &[f64], vel: &mut [f64], lr: f64, momentum: f64) {
    for ((p, g), v) in params.iter_mut().zip(grads).zip(vel.iter_mut()) {
        *v = -lr * g + momentum * *v;
        *p += *v;
    }
}

/// Online backpropagation with momentum.
///
/// Samples are visited in a fresh seeded shuffle each epoch. The epoch SSE is
/// summed over the samples as they are presented; training stops once it falls
/// to `target_sse` or after `max_epochs`.
pub fn train_backprop(
    model: &MlpModel,
    data: &[(FeatureVector, usize)],
    cfg: &TrainConfig,
) -> Result<(MlpModel, TrainReport), NetError> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(NetError::EmptyDataset);
    }
    if let Some(&(_, c)) = data.iter().find(|(_, c)| *c >= OUTPUTS) {
        return Err(NetError::BadClass(c));
    }
    let mut m = model.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut vel = Velocity {
        w1: vec![0.0; HIDDEN * INPUTS],
        b1: vec![0.0; HIDDEN],
        w2: vec![0.0; OUTPUTS * HIDDEN],
        b2: vec![0.0; OUTPUTS],
    };
    let targets: Vec<[f64; OUTPUTS]> = (0..OUTPUTS).map(|c| targets(c, cfg)).collect();
    let mut grad = Gradient::zeros();
    let mut history = Vec::with_capacity(cfg.max_epochs);
    let mut stopped_early = false;

    for epoch in 0..cfg.max_epochs {
        order.shuffle(&mut rng);
        let mut sse = 0.0;
        for &i in &order {
            let (x, class) = &data[i];
            grad.w1.fill(0.0);
            grad.b1.fill(0.0);
            grad.w2.fill(0.0);
            grad.b2.fill(0.0);
            sse += grad.accumulate(&m, &x.0, &targets[*class]);
            step(&mut m.w2, &grad.w2, &mut vel.w2, cfg.learning_rate, cfg.momentum);
            step(&mut m.b2, &grad.b2, &mut vel.b2, cfg.learning_rate, cfg.momentum);
            step(&mut m.w1, &grad.w1, &mut vel.w1, cfg.learning_rate, cfg.momentum);
            step(&mut m.b1, &grad.b1, &mut vel.b1, cfg.learning_rate, cfg.momentum);
        }
        if !sse.is_finite() || !m.is_finite() {
            return Err(NetError::DivergedToNonFinite { epoch: epoch + 1 });
        }
        history.push(sse);
        if sse <= cfg.target_sse {
            stopped_early = true;
            break;
        }
    }

    let report = TrainReport {
        epochs_run: history.len(),
        final_sse: *history.last().expect("at least one epoch"),
        sse_history: history,
        stopped_early,
    };
    Ok((m, report))
}

/// `σ(mid + half) − σ(mid − half)` without subtracting two nearly equal sigmoids.
fn sigmoid_span(mid: f64, half: f64) -> f64 {
    half.sinh() / (mid.cosh() + half.cosh())
}

struct PreActivations {
    a: Vec<f64>,
    hidden: Vec<f64>,
    z: Vec<f64>,
}

impl PreActivations {
    fn new(m: &MlpModel, x: &[f64; INPUTS]) -> Self {
        let a: Vec<f64> = (0..HIDDEN).map(|h| dot(&m.w1[h * INPUTS..(h + 1) * INPUTS], x) + m.b1[h]).collect();
        let hidden: Vec<f64> = a.iter().map(|&v| sigmoid(v)).collect();
        let z: Vec<f64> = (0..OUTPUTS).map(|k| dot(&m.w2[k * HIDDEN..(k + 1) * HIDDEN], &hidden) + m.b2[k]).collect();
        Self { a, hidden, z }
    }
}

/// `½·SSE(θ + ε·e_i) − ½·SSE(θ − ε·e_i)` for one parameter, propagated
/// through the forward pass as differences so nothing cancels.
///
/// Each output's pre-activation under `±ε` is kept as a midpoint shift and a
/// half-width rather than as two absolute values, since re-forming `z ± δ`
/// for tiny `δ` would round away most of `δ`.
fn loss_delta(m: &MlpModel, pre: &PreActivations, x: &[f64; INPUTS], target: &[f64; OUTPUTS], i: usize, eps: f64) -> f64 {
    let PreActivations { a, hidden, z } = pre;
    let mut shift = [0.0; OUTPUTS];
    let mut half = [0.0; OUTPUTS];
    let n1 = HIDDEN * INPUTS;
    let n2 = n1 + HIDDEN;
    let n3 = n2 + OUTPUTS * HIDDEN;
    if i < n2 {
        let (h, d) = if i < n1 { (i / INPUTS, eps * x[i % INPUTS]) } else { (i - n1, eps) };
        // σ(a ± d) as a half-span around σ(a) plus the (second order) drift of the midpoint.
        let span = sigmoid_span(a[h], d) / 2.0;
        let drift = (sigmoid_span(a[h] + d / 2.0, d / 2.0) - sigmoid_span(a[h] - d / 2.0, d / 2.0)) / 2.0;
        for k in 0..OUTPUTS {
            let w = m.w2[k * HIDDEN + h];
            half[k] = w * span;
            shift[k] = w * drift;
        }
    } else {
        let (k, d) = if i < n3 { ((i - n2) / HIDDEN, eps * hidden[(i - n2) % HIDDEN]) } else { (i - n3, eps) };
        half[k] = d;
    }
    (0..OUTPUTS)
        .map(|k| {
            let mid = z[k] + shift[k];
            let d_out = sigmoid_span(mid, half[k]);
            let (op, om) = (sigmoid(mid + half[k]), sigmoid(mid - half[k]));
            0.5 * d_out * (op + om - 2.0 * target[k])
        })
        .sum()
}

/// Largest relative disagreement between the analytic gradient of `½·SSE`
/// and central finite differences `(L(θ+ε) − L(θ−ε)) / 2ε`, over every parameter.
///
/// Relative error uses the denominator `max(|analytic|, |numeric|, 1e-8)`.
/// The loss difference is carried through the network as differences of
/// activations, so gradients near the `1e-8` floor are not swamped by the
/// rounding error of the full loss.
pub fn gradient_check(m: &MlpModel, sample: &(FeatureVector, usize), eps: f64, cfg: &TrainConfig) -> f64 {
    let target = targets(sample.1, cfg);
    let analytic = gradient(m, &sample.0, &target);
    let pre = PreActivations::new(m, &sample.0 .0);
    let mut worst = 0.0f64;
    for (i, a) in analytic.iter().enumerate() {
        let numeric = loss_delta(m, &pre, &sample.0 .0, &target, i, eps) / (2.0 * eps);
        let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
        worst = worst.max(err);
    }
    worst
}
