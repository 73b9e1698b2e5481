//! Neural-network performance model.
//!
//! Each [`Network`] has one sigmoid hidden layer of [`HIDDEN_UNITS`] units
//! and a linear output predicting a standardized log execution time. An
//! [`Ensemble`] holds `k` networks, each trained on all folds but one, and
//! predicts the exponential of their mean log-time output.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::measure::SampleSet;
use crate::seed::{derive_seed, rng};
use crate::space::{Configuration, ParamSpace};
use crate::{Error, Result};

pub const HIDDEN_UNITS: usize = 30;

/// Number of bagged networks used unless configured otherwise.
pub const DEFAULT_BAG_SIZE: usize = 11;

/// Stream id reserved for the fold assignment shuffle.
const FOLD_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Initial weights are uniform in `[-0.5, 0.5]` times this scale.
    pub weight_init_scale: f64,
    pub seed: u64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub optimizer: Optimizer,
}

/// Update rule applied to each mini-batch's mean gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Optimizer {
    /// `w -= lr * g`.
    Sgd,
    /// Adam with beta1 = 0.9, beta2 = 0.999, eps = 1e-8.
    #[default]
    Adam,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { epochs: 500, learning_rate: 0.01, batch_size: 32, weight_init_scale: 1.0, seed: 0, optimizer: Optimizer::Adam }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::InvalidArgument("epochs and batch_size must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        if !(self.weight_init_scale > 0.0 && self.weight_init_scale.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "weight init scale must be positive, got {}",
                self.weight_init_scale
            )));
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum FeatureRule {
    /// `{0, 1}` flag passed through as is.
    Binary,
    /// Position in the value list divided by `count - 1`.
    Rank,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EncodedParam {
    pub name: String,
    pub rule: FeatureRule,
    pub values: Vec<i64>,
}

/// Maps configurations to feature vectors in `[0, 1]^n`, one feature per parameter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encoder {
    params: Vec<EncodedParam>,
}

impl Encoder {
    pub fn for_space(space: &ParamSpace) -> Self {
        let params = space
            .params()
            .iter()
            .map(|p| EncodedParam {
                name: p.name.clone(),
                rule: if p.values == [0, 1] { FeatureRule::Binary } else { FeatureRule::Rank },
                values: p.values.clone(),
            })
            .collect();
        Self { params }
    }

    pub fn from_params(params: Vec<EncodedParam>) -> Result<Self> {
        for p in &params {
            if p.values.is_empty() {
                return Err(Error::Model(format!("encoder parameter `{}` has no values", p.name)));
            }
            if p.rule == FeatureRule::Binary && p.values != [0, 1] {
                return Err(Error::Model(format!("binary parameter `{}` must have values [0, 1]", p.name)));
            }
        }
        Ok(Self { params })
    }

    pub fn params(&self) -> &[EncodedParam] {
        &self.params
    }

    pub fn input_dim(&self) -> usize {
        self.params.len()
    }

    /// Whether this encoder was derived from `space`'s parameter list.
    pub fn matches(&self, space: &ParamSpace) -> bool {
        self.params.len() == space.len()
            && self.params.iter().zip(space.params()).all(|(e, p)| e.name == p.name && e.values == p.values)
    }

    fn feature(param: &EncodedParam, position: usize) -> f64 {
        match param.rule {
            FeatureRule::Binary => param.values[position] as f64,
            FeatureRule::Rank if param.values.len() == 1 => 0.0,
            FeatureRule::Rank => position as f64 / (param.values.len() - 1) as f64,
        }
    }

    /// Encodes value positions (as produced by [`ParamSpace::positions_at`]).
    pub fn encode_positions(&self, positions: &[usize], out: &mut [f64]) {
        for ((slot, p), &pos) in out.iter_mut().zip(&self.params).zip(positions) {
            *slot = Self::feature(p, pos);
        }
    }

    pub fn encode(&self, config: &Configuration) -> Result<Vec<f64>> {
        let values = config.values();
        if values.len() != self.params.len() {
            return Err(Error::Mismatch(format!(
                "configuration has {} values, encoder expects {}",
                values.len(),
                self.params.len()
            )));
        }
        self.params
            .iter()
            .zip(values)
            .map(|(p, &v)| {
                p.values
                    .iter()
                    .position(|&x| x == v)
                    .map(|pos| Self::feature(p, pos))
                    .ok_or_else(|| Error::Mismatch(format!("value {v} is not admissible for parameter `{}`", p.name)))
            })
            .collect()
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-z))
}

/// Single-hidden-layer network: `w_out . sigmoid(W x + b) + b_out`.
///
/// The output lives in standardized log-time units; `target_mean` and
/// `target_std` map it back to natural-log seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    input_dim: usize,
    /// Row-major `HIDDEN_UNITS x input_dim`.
    w_hidden: Vec<f64>,
    b_hidden: Vec<f64>,
    w_out: Vec<f64>,
    b_out: f64,
    target_mean: f64,
    target_std: f64,
}

/// Gradients of the half squared error with the same layout as [`Network`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w_hidden: Vec<f64>,
    pub b_hidden: Vec<f64>,
    pub w_out: Vec<f64>,
    pub b_out: f64,
}

impl Gradients {
    fn zeros(input_dim: usize) -> Self {
        Self {
            w_hidden: vec![0.0; HIDDEN_UNITS * input_dim],
            b_hidden: vec![0.0; HIDDEN_UNITS],
            w_out: vec![0.0; HIDDEN_UNITS],
            b_out: 0.0,
        }
    }

    fn clear(&mut self) {
        self.w_hidden.fill(0.0);
        self.b_hidden.fill(0.0);
        self.w_out.fill(0.0);
        self.b_out = 0.0;
    }

    /// All gradient entries, hidden weights first.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = self.w_hidden.clone();
        out.extend_from_slice(&self.b_hidden);
        out.extend_from_slice(&self.w_out);
        out.push(self.b_out);
        out
    }
}

impl Network {
    /// All weights and biases zero, identity target transform.
    pub fn zeros(input_dim: usize) -> Self {
        Self {
            input_dim,
            w_hidden: vec![0.0; HIDDEN_UNITS * input_dim],
            b_hidden: vec![0.0; HIDDEN_UNITS],
            w_out: vec![0.0; HIDDEN_UNITS],
            b_out: 0.0,
            target_mean: 0.0,
            target_std: 1.0,
        }
    }

    /// Weights and biases uniform in `[-scale/2, scale/2]`.
    pub fn random(input_dim: usize, scale: f64, rng: &mut impl Rng) -> Self {
        let mut net = Self::zeros(input_dim);
        let mut draw = || (rng.random::<f64>() - 0.5) * scale;
        net.w_hidden.iter_mut().for_each(|w| *w = draw());
        net.b_hidden.iter_mut().for_each(|w| *w = draw());
        net.w_out.iter_mut().for_each(|w| *w = draw());
        net.b_out = draw();
        net
    }

    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        input_dim: usize,
        w_hidden: Vec<f64>,
        b_hidden: Vec<f64>,
        w_out: Vec<f64>,
        b_out: f64,
        target_mean: f64,
        target_std: f64,
    ) -> Result<Self> {
        if w_hidden.len() != HIDDEN_UNITS * input_dim || b_hidden.len() != HIDDEN_UNITS || w_out.len() != HIDDEN_UNITS {
            return Err(Error::Model(format!(
                "expected {HIDDEN_UNITS}x{input_dim} hidden weights, {HIDDEN_UNITS} hidden biases and {HIDDEN_UNITS} output weights"
            )));
        }
        let all_finite = w_hidden.iter().chain(&b_hidden).chain(&w_out).chain([&b_out, &target_mean, &target_std])
            .all(|w| w.is_finite());
        if !all_finite || target_std <= 0.0 {
            return Err(Error::Model("weights must be finite and target std positive".into()));
        }
        Ok(Self { input_dim, w_hidden, b_hidden, w_out, b_out, target_mean, target_std })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn w_hidden(&self) -> &[f64] {
        &self.w_hidden
    }

    pub fn b_hidden(&self) -> &[f64] {
        &self.b_hidden
    }

    pub fn w_out(&self) -> &[f64] {
        &self.w_out
    }

    pub fn b_out(&self) -> f64 {
        self.b_out
    }

    pub fn target_mean(&self) -> f64 {
        self.target_mean
    }

    pub fn target_std(&self) -> f64 {
        self.target_std
    }

    pub fn w_hidden_mut(&mut self) -> &mut [f64] {
        &mut self.w_hidden
    }

    pub fn b_hidden_mut(&mut self) -> &mut [f64] {
        &mut self.b_hidden
    }

    pub fn w_out_mut(&mut self) -> &mut [f64] {
        &mut self.w_out
    }

    pub fn set_b_out(&mut self, b: f64) {
        self.b_out = b;
    }

    fn check_dim(&self, features: &[f64]) -> Result<()> {
        if features.len() == self.input_dim {
            Ok(())
        } else {
            Err(Error::Mismatch(format!("expected {} features, got {}", self.input_dim, features.len())))
        }
    }

    /// Fills `hidden` with the hidden activations and returns the raw output.
    fn activate(&self, features: &[f64], hidden: &mut [f64; HIDDEN_UNITS]) -> f64 {
        let mut out = self.b_out;
        for (j, h) in hidden.iter_mut().enumerate() {
            let row = &self.w_hidden[j * self.input_dim..(j + 1) * self.input_dim];
            let z = self.b_hidden[j] + row.iter().zip(features).map(|(w, x)| w * x).sum::<f64>();
            *h = sigmoid(z);
            out += self.w_out[j] * *h;
        }
        out
    }

    /// Raw network output in standardized units.
    pub fn forward(&self, features: &[f64]) -> Result<f64> {
        self.check_dim(features)?;
        Ok(self.activate(features, &mut [0.0; HIDDEN_UNITS]))
    }

    /// Predicted natural-log execution time.
    pub fn predict_log(&self, features: &[f64]) -> Result<f64> {
        Ok(self.target_mean + self.target_std * self.forward(features)?)
    }

    fn predict_log_unchecked(&self, features: &[f64]) -> f64 {
        self.target_mean + self.target_std * self.activate(features, &mut [0.0; HIDDEN_UNITS])
    }

    /// Adds the gradient of `0.5 * (forward(x) - target)^2` into `grads` and
    /// returns the squared residual.
    fn accumulate(&self, features: &[f64], target: f64, grads: &mut Gradients) -> f64 {
        let mut hidden = [0.0; HIDDEN_UNITS];
        let residual = self.activate(features, &mut hidden) - target;
        grads.b_out += residual;
        for (j, &h) in hidden.iter().enumerate() {
            grads.w_out[j] += residual * h;
            let delta = residual * self.w_out[j] * h * (1.0 - h);
            grads.b_hidden[j] += delta;
            let row = &mut grads.w_hidden[j * self.input_dim..(j + 1) * self.input_dim];
            for (g, x) in row.iter_mut().zip(features) {
                *g += delta * x;
            }
        }
        residual * residual
    }

    fn step(&mut self, grads: &Gradients, rate: f64) {
        for (w, g) in self.w_hidden.iter_mut().zip(&grads.w_hidden) {
            *w -= rate * g;
        }
        for (w, g) in self.b_hidden.iter_mut().zip(&grads.b_hidden) {
            *w -= rate * g;
        }
        for (w, g) in self.w_out.iter_mut().zip(&grads.w_out) {
            *w -= rate * g;
        }
        self.b_out -= rate * grads.b_out;
    }

    /// All weights and biases, in [`Gradients::flatten`] order.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = self.w_hidden.clone();
        out.extend_from_slice(&self.b_hidden);
        out.extend_from_slice(&self.w_out);
        out.push(self.b_out);
        out
    }

    fn all_finite(&self) -> bool {
        self.flatten().iter().all(|w| w.is_finite())
    }
}

enum OptimizerState {
    Sgd,
    Adam { t: i32, m: Gradients, v: Gradients },
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

fn adam_update(w: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64], rate: f64, grad_scale: f64) {
    for (((w, &g), m), v) in w.iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
        let g = g * grad_scale;
        *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
        *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
        *w -= rate * *m / (libm::sqrt(*v) + ADAM_EPS);
    }
}

impl OptimizerState {
    fn new(kind: Optimizer, input_dim: usize) -> Self {
        match kind {
            Optimizer::Sgd => OptimizerState::Sgd,
            Optimizer::Adam => OptimizerState::Adam {
                t: 0,
                m: Gradients::zeros(input_dim),
                v: Gradients::zeros(input_dim),
            },
        }
    }

    /// Applies the summed gradient of a batch of `batch_len` samples.
    fn step(&mut self, net: &mut Network, grads: &Gradients, lr: f64, batch_len: usize) {
        let scale = 1.0 / batch_len as f64;
        match self {
            OptimizerState::Sgd => net.step(grads, lr * scale),
            OptimizerState::Adam { t, m, v } => {
                *t += 1;
                let rate = lr * libm::sqrt(1.0 - libm::pow(ADAM_BETA2, f64::from(*t)))
                    / (1.0 - libm::pow(ADAM_BETA1, f64::from(*t)));
                adam_update(&mut net.w_hidden, &grads.w_hidden, &mut m.w_hidden, &mut v.w_hidden, rate, scale);
                adam_update(&mut net.b_hidden, &grads.b_hidden, &mut m.b_hidden, &mut v.b_hidden, rate, scale);
                adam_update(&mut net.w_out, &grads.w_out, &mut m.w_out, &mut v.w_out, rate, scale);
                adam_update(
                    core::slice::from_mut(&mut net.b_out),
                    &[grads.b_out],
                    core::slice::from_mut(&mut m.b_out),
                    core::slice::from_mut(&mut v.b_out),
                    rate,
                    scale,
                );
            }
        }
    }
}

/// Backpropagated gradient of `0.5 * (forward(features) - target)^2` for one
/// sample. `target` is in the network's raw output units.
pub fn gradient(net: &Network, features: &[f64], target: f64) -> Result<Gradients> {
    net.check_dim(features)?;
    let mut grads = Gradients::zeros(net.input_dim);
    net.accumulate(features, target, &mut grads);
    Ok(grads)
}

/// Per-epoch mean squared error on the standardized training targets.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainLog {
    pub epoch_mse: Vec<f64>,
}

/// Mini-batch training on `(features, ln time)` pairs with the configured
/// optimizer. Targets are standardized first; the network stores the inverse.
fn fit(data: &[(Vec<f64>, f64)], input_dim: usize, cfg: &TrainConfig) -> Result<(Network, TrainLog)> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let n = data.len() as f64;
    let mean = data.iter().map(|(_, y)| y).sum::<f64>() / n;
    let var = data.iter().map(|(_, y)| (y - mean) * (y - mean)).sum::<f64>() / n;
    let std = if var > 1e-24 { libm::sqrt(var) } else { 1.0 };
    let targets: Vec<f64> = data.iter().map(|(_, y)| (y - mean) / std).collect();

    let mut rng = rng(cfg.seed);
    let mut net = Network::random(input_dim, cfg.weight_init_scale, &mut rng);
    net.target_mean = mean;
    net.target_std = std;

    let mut grads = Gradients::zeros(input_dim);
    let mut optimizer = OptimizerState::new(cfg.optimizer, input_dim);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut log = TrainLog { epoch_mse: Vec::with_capacity(cfg.epochs) };
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut sse = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            grads.clear();
            for &i in batch {
                sse += net.accumulate(&data[i].0, targets[i], &mut grads);
            }
            optimizer.step(&mut net, &grads, cfg.learning_rate, batch.len());
        }
        let mse = sse / n;
        if !mse.is_finite() || !net.all_finite() {
            return Err(Error::Divergence { epoch });
        }
        log.epoch_mse.push(mse);
    }
    Ok((net, log))
}

/// Encoded `(features, ln time)` pairs of the valid samples, in order.
fn training_pairs(samples: &SampleSet, space: &ParamSpace, encoder: &Encoder) -> Result<Vec<(Vec<f64>, f64)>> {
    samples.check_space(space)?;
    samples
        .valid()
        .map(|(config, time)| Ok((encoder.encode(config)?, libm::log(time))))
        .collect()
}

/// Trains one network on the valid samples; invalid samples are ignored.
pub fn train_network(samples: &SampleSet, space: &ParamSpace, cfg: &TrainConfig) -> Result<Network> {
    train_network_logged(samples, space, cfg).map(|(net, _)| net)
}

pub fn train_network_logged(samples: &SampleSet, space: &ParamSpace, cfg: &TrainConfig) -> Result<(Network, TrainLog)> {
    let encoder = Encoder::for_space(space);
    let data = training_pairs(samples, space, &encoder)?;
    fit(&data, encoder.input_dim(), cfg)
}

/// Bagged networks sharing one encoder.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    space_name: String,
    encoder: Encoder,
    networks: Vec<Network>,
}

impl Ensemble {
    pub fn from_parts(space_name: impl Into<String>, encoder: Encoder, networks: Vec<Network>) -> Result<Self> {
        if networks.is_empty() {
            return Err(Error::Model("an ensemble needs at least one network".into()));
        }
        if let Some(net) = networks.iter().find(|n| n.input_dim != encoder.input_dim()) {
            return Err(Error::Model(format!(
                "network input dimension {} does not match encoder dimension {}",
                net.input_dim,
                encoder.input_dim()
            )));
        }
        Ok(Self { space_name: space_name.into(), encoder, networks })
    }

    pub fn space_name(&self) -> &str {
        &self.space_name
    }

    pub fn encoder(&self) -> &Encoder {
        &self.encoder
    }

    pub fn networks(&self) -> &[Network] {
        &self.networks
    }

    pub fn k(&self) -> usize {
        self.networks.len()
    }

    pub fn input_dim(&self) -> usize {
        self.encoder.input_dim()
    }

    /// Mean of the members' predicted log-times.
    pub fn predict_log_features(&self, features: &[f64]) -> Result<f64> {
        if features.len() != self.input_dim() {
            return Err(Error::Mismatch(format!("expected {} features, got {}", self.input_dim(), features.len())));
        }
        Ok(self.predict_log_unchecked(features))
    }

    pub(crate) fn predict_log_unchecked(&self, features: &[f64]) -> f64 {
        let sum: f64 = self.networks.iter().map(|n| n.predict_log_unchecked(features)).sum();
        sum / self.networks.len() as f64
    }

    pub fn predict_log(&self, config: &Configuration) -> Result<f64> {
        Ok(self.predict_log_unchecked(&self.encoder.encode(config)?))
    }

    /// Predicted execution time in seconds (geometric mean of the members).
    pub fn predict(&self, config: &Configuration) -> Result<f64> {
        self.predict_log(config).map(libm::exp)
    }
}

/// Trains `k` networks. Valid samples are split into `k` folds whose sizes
/// differ by at most one; network `i` trains on every fold except fold `i`.
/// With `k = 1` the single network trains on all samples, exactly as
/// [`train_network`] does.
pub fn train_ensemble(samples: &SampleSet, space: &ParamSpace, k: usize, cfg: &TrainConfig) -> Result<Ensemble> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    cfg.validate()?;
    let encoder = Encoder::for_space(space);
    let data = training_pairs(samples, space, &encoder)?;
    if data.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if data.len() < k {
        return Err(Error::InsufficientData { needed: k, available: data.len() });
    }
    let dim = encoder.input_dim();
    let networks = if k == 1 {
        vec![fit(&data, dim, cfg)?.0]
    } else {
        let folds = fold_assignment(data.len(), k, derive_seed(cfg.seed, FOLD_STREAM));
        let member = |i: usize| -> Result<Network> {
            let subset: Vec<(Vec<f64>, f64)> =
                data.iter().zip(&folds).filter(|&(_, &f)| f != i).map(|(d, _)| d.clone()).collect();
            Ok(fit(&subset, dim, &cfg.with_seed(derive_seed(cfg.seed, i as u64)))?.0)
        };
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            (0..k).into_par_iter().map(member).collect::<Result<Vec<_>>>()?
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..k).map(member).collect::<Result<Vec<_>>>()?
        }
    };
    Ensemble::from_parts(space.name(), encoder, networks)
}

/// Fold id of each of `n` items: a seeded shuffle dealt round-robin into `k` folds.
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng(seed));
    let mut folds = vec![0; n];
    for (slot, &item) in order.iter().enumerate() {
        folds[item] = slot % k;
    }
    folds
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{Outcome, Sample};
    use crate::space::{builtin_space, ParamDef};

    fn random_net(seed: u64, dim: usize) -> Network {
        Network::random(dim, 2.0, &mut rng(seed))
    }

    #[test]
    fn encoder_rules() {
        let conv = builtin_space("convolution").unwrap();
        let enc = Encoder::for_space(&conv);
        assert_eq!(enc.params()[0].rule, FeatureRule::Rank);
        assert_eq!(enc.params()[4].rule, FeatureRule::Binary);
        let x = enc.encode(&Configuration::new([8, 1, 128, 1, 0, 1, 0, 1, 0])).unwrap();
        assert_eq!(x[0], 3.0 / 7.0);
        assert_eq!(x[1], 0.0);
        assert_eq!(x[2], 1.0);
        assert_eq!(&x[4..], &[0.0, 1.0, 0.0, 1.0, 0.0]);
        assert!(enc.encode(&Configuration::new([3, 1, 1, 1, 0, 0, 0, 0, 0])).is_err());
        assert!(enc.encode(&Configuration::new([1])).is_err());
    }

    #[test]
    fn zero_network_outputs_zero() {
        assert_eq!(Network::zeros(4).forward(&[0.3, 0.1, 0.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn unit_output_weights_sum_half_activations() {
        let mut net = Network::zeros(3);
        net.w_out_mut().fill(1.0);
        assert_eq!(net.forward(&[1.0, 0.5, 0.2]).unwrap(), 15.0);
    }

    #[test]
    fn forward_rejects_wrong_dimension() {
        assert!(matches!(Network::zeros(3).forward(&[1.0]), Err(Error::Mismatch(_))));
    }

    #[test]
    fn gradient_zero_at_perfect_prediction() {
        let net = random_net(5, 4);
        let x = [0.2, 0.9, 0.0, 1.0];
        let y = net.forward(&x).unwrap();
        assert!(gradient(&net, &x, y).unwrap().flatten().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn output_gradient_is_linear_in_residual() {
        let net = random_net(6, 3);
        let x = [0.5, 0.25, 1.0];
        let y = net.forward(&x).unwrap();
        let g1 = gradient(&net, &x, y - 0.3).unwrap();
        let g2 = gradient(&net, &x, y - 0.6).unwrap();
        assert!((g2.b_out - 2.0 * g1.b_out).abs() < 1e-12);
        for (a, b) in g1.w_out.iter().zip(&g2.w_out) {
            assert!((b - 2.0 * a).abs() < 1e-12);
        }
    }

    fn two_level_set(space: &ParamSpace) -> SampleSet {
        let mut set = SampleSet::new(space.name(), "test");
        for i in 0..space.cardinality() {
            let c = space.config_at_index(i).unwrap();
            let t = if c.values()[1] == 1 { 0.5 } else { 1.0 };
            set.samples.push(Sample::new(c, Outcome::Valid { time: t }, 1));
        }
        set
    }

    fn tiny_space() -> ParamSpace {
        ParamSpace::new("tiny", vec![ParamDef::new("a", [1, 2, 4, 8]), ParamDef::flag("f")], vec![]).unwrap()
    }

    #[test]
    fn memorizes_single_sample() {
        let space = tiny_space();
        let mut set = SampleSet::new("tiny", "t");
        let c = Configuration::new([4, 1]);
        set.samples.push(Sample::new(c.clone(), Outcome::Valid { time: 0.37 }, 1));
        let cfg = TrainConfig { epochs: 200, ..TrainConfig::default() };
        let net = train_network(&set, &space, &cfg).unwrap();
        let enc = Encoder::for_space(&space);
        let pred = net.predict_log(&enc.encode(&c).unwrap()).unwrap();
        let target = libm::log(0.37);
        assert!(((pred - target) / target).abs() < 0.01);
    }

    #[test]
    fn training_is_deterministic() {
        let space = tiny_space();
        let set = two_level_set(&space);
        let cfg = TrainConfig { epochs: 50, seed: 9, ..TrainConfig::default() };
        let a = train_network(&set, &space, &cfg).unwrap();
        let b = train_network(&set, &space, &cfg).unwrap();
        assert_eq!(a.flatten(), b.flatten());
        let c = train_network(&set, &space, &cfg.with_seed(10)).unwrap();
        assert_ne!(a.flatten(), c.flatten());
    }

    #[test]
    fn invalid_only_set_is_empty_training() {
        let space = tiny_space();
        let mut set = SampleSet::new("tiny", "t");
        set.samples.push(Sample::static_invalid(Configuration::new([1, 0])));
        assert_eq!(train_network(&set, &space, &TrainConfig::default()), Err(Error::EmptyTrainingSet));
        assert_eq!(train_ensemble(&set, &space, 11, &TrainConfig::default()), Err(Error::EmptyTrainingSet));
    }

    #[test]
    fn ensemble_needs_k_valid_samples() {
        let space = tiny_space();
        let set = two_level_set(&space);
        assert_eq!(
            train_ensemble(&set, &space, 11, &TrainConfig::default()),
            Err(Error::InsufficientData { needed: 11, available: 8 })
        );
    }

    #[test]
    fn single_member_ensemble_equals_train_network() {
        let space = tiny_space();
        let set = two_level_set(&space);
        let cfg = TrainConfig { epochs: 40, seed: 3, ..TrainConfig::default() };
        let net = train_network(&set, &space, &cfg).unwrap();
        let ens = train_ensemble(&set, &space, 1, &cfg).unwrap();
        assert_eq!(ens.networks()[0], net);
    }

    #[test]
    fn fold_sizes_are_balanced() {
        let folds = fold_assignment(2000, 11, 1);
        let mut sizes = [0usize; 11];
        for f in folds {
            sizes[f] += 1;
        }
        assert!(sizes.iter().all(|&s| s == 181 || s == 182));
        assert_eq!(sizes.iter().sum::<usize>(), 2000);
    }

    #[test]
    fn identical_members_predict_like_one() {
        let space = tiny_space();
        let enc = Encoder::for_space(&space);
        let mut net = Network::zeros(2);
        net.set_b_out(libm::log(2.0));
        let ens = Ensemble::from_parts("tiny", enc.clone(), vec![net.clone(); 11]).unwrap();
        let c = Configuration::new([2, 0]);
        assert!((ens.predict(&c).unwrap() - 2.0).abs() < 1e-14);

        let mut other = Network::zeros(2);
        net.set_b_out(0.0);
        other.set_b_out(libm::log(4.0));
        let ens = Ensemble::from_parts("tiny", enc, vec![net, other]).unwrap();
        assert!((ens.predict(&c).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn ensemble_rejects_mismatched_members() {
        let enc = Encoder::for_space(&tiny_space());
        assert!(Ensemble::from_parts("tiny", enc.clone(), vec![]).is_err());
        assert!(Ensemble::from_parts("tiny", enc, vec![Network::zeros(3)]).is_err());
    }
}
