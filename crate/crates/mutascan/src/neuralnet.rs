//! Feed-forward network with logistic-sigmoid units and exact per-sample
//! backpropagation.
//!
//! Forward pass per non-input layer: `net_in_j = bias_j + sum_i in_i * w_ji`,
//! `out_j = f(net_in_j)` with `f` the logistic sigmoid. Training applies, for
//! each example in fixed order, the weight corrections
//! `dw_jk = alpha * delta_k * z_j` and `db_k = alpha * delta_k`, where the
//! output error is `delta_k = (t_k - y_k) * f'(y_in_k)` and hidden errors
//! back-propagate as `delta_j = (sum_k delta_k * w_jk) * f'(z_in_j)` using
//! the pre-update weights. That is gradient descent on `E = 1/2 sum (t-y)^2`.

use std::fmt;
use std::fs;
use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::LabeledExample;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("bad network shape: {0}")]
    BadShape(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("training diverged: loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("unsupported model version {found:?}")]
    VersionMismatch { found: String },
    #[error("corrupt model file: {0}")]
    CorruptModel(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    LogisticSigmoid,
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Activation::LogisticSigmoid => write!(f, "logistic-sigmoid"),
        }
    }
}

#[inline]
pub fn sigmoid(u: f64) -> f64 {
    1.0 / (1.0 + (-u).exp())
}

/// f'(u) = f(u) * (1 - f(u)).
#[inline]
pub fn sigmoid_prime(u: f64) -> f64 {
    let s = sigmoid(u);
    s * (1.0 - s)
}

/// Layer sizes plus per-layer weight matrices and bias vectors.
/// `weights[l][j][i]` connects unit `i` of layer `l` to unit `j` of layer
/// `l + 1`; `biases[l][j]` is that upper unit's bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub layer_sizes: Vec<usize>,
    pub weights: Vec<Vec<Vec<f64>>>,
    pub biases: Vec<Vec<f64>>,
    pub activation: Activation,
}

impl Network {
    pub fn input_len(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_len(&self) -> usize {
        *self.layer_sizes.last().expect("at least two layers")
    }

    fn check_shapes(&self) -> Result<(), NetError> {
        if self.layer_sizes.len() < 3 {
            return Err(NetError::BadShape(format!(
                "need input, at least one hidden, and output layer; got {:?}",
                self.layer_sizes
            )));
        }
        if self.layer_sizes.iter().any(|&s| s == 0) {
            return Err(NetError::BadShape("layer sizes must be >= 1".into()));
        }
        for l in 0..self.layer_sizes.len() - 1 {
            let (lower, upper) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
            if self.weights[l].len() != upper
                || self.weights[l].iter().any(|row| row.len() != lower)
                || self.biases[l].len() != upper
            {
                return Err(NetError::BadShape(format!(
                    "layer {l} parameters do not match sizes {lower}->{upper}"
                )));
            }
        }
        Ok(())
    }
}

/// Parameter-shaped corrections produced by one backpropagation step.
#[derive(Debug, Clone, PartialEq)]
pub struct Updates {
    pub weights: Vec<Vec<Vec<f64>>>,
    pub biases: Vec<Vec<f64>>,
}

/// Per-layer intermediate vectors from a forward pass; index 0 is the first
/// hidden layer and the last entry is the output layer.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    pub net_inputs: Vec<Vec<f64>>,
    pub activations: Vec<Vec<f64>>,
}

impl ForwardPass {
    pub fn output(&self) -> &[f64] {
        self.activations.last().expect("non-empty network")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub mse_goal: f64,
    pub max_epochs: usize,
    pub seed: u64,
    pub init_range: f64,
}

pub const DEFAULT_LEARNING_RATE: f64 = 0.5;
pub const DEFAULT_MSE_GOAL: f64 = 1e-7;
pub const DEFAULT_MAX_EPOCHS: usize = 500_000;
pub const DEFAULT_INIT_RANGE: f64 = 0.5;
pub const DEFAULT_HIDDEN_WIDTH: usize = 16;

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: DEFAULT_LEARNING_RATE,
            mse_goal: DEFAULT_MSE_GOAL,
            max_epochs: DEFAULT_MAX_EPOCHS,
            seed: 1,
            init_range: DEFAULT_INIT_RANGE,
        }
    }
}

/// Default architecture: two hidden layers between the given endpoints.
pub fn default_layer_sizes(inputs: usize, outputs: usize) -> Vec<usize> {
    vec![inputs, DEFAULT_HIDDEN_WIDTH, DEFAULT_HIDDEN_WIDTH, outputs]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs_run: usize,
    pub final_mse: f64,
    pub goal_met: bool,
    pub mse_history: Vec<f64>,
}

/// Initialize weights and biases i.i.d. uniform on `[-init_range, init_range]`
/// from a seeded generator; deterministic in (sizes, seed, range).
pub fn init_network(layer_sizes: &[usize], seed: u64, init_range: f64) -> Result<Network, NetError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |n: usize| -> Vec<f64> {
        (0..n)
            .map(|_| {
                if init_range == 0.0 {
                    0.0
                } else {
                    rng.random_range(-init_range..=init_range)
                }
            })
            .collect()
    };
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for l in 0..layer_sizes.len().saturating_sub(1) {
        let (lower, upper) = (layer_sizes[l], layer_sizes[l + 1]);
        weights.push((0..upper).map(|_| draw(lower)).collect());
        biases.push(draw(upper));
    }
    let net = Network {
        layer_sizes: layer_sizes.to_vec(),
        weights,
        biases,
        activation: Activation::LogisticSigmoid,
    };
    net.check_shapes()?;
    Ok(net)
}

/// Cascade `x` through the network, returning every layer's net input and
/// activation for use in training. Dot products sum in ascending index order.
pub fn forward(net: &Network, x: &[f64]) -> Result<ForwardPass, NetError> {
    if x.len() != net.input_len() {
        return Err(NetError::ShapeMismatch(format!(
            "input has {} values, network expects {}",
            x.len(),
            net.input_len()
        )));
    }
    let layers = net.weights.len();
    let mut net_inputs = Vec::with_capacity(layers);
    let mut activations: Vec<Vec<f64>> = Vec::with_capacity(layers);
    for l in 0..layers {
        let below: &[f64] = if l == 0 { x } else { &activations[l - 1] };
        let mut net_in = Vec::with_capacity(net.layer_sizes[l + 1]);
        for (row, bias) in net.weights[l].iter().zip(&net.biases[l]) {
            let mut sum = *bias;
            for (w, v) in row.iter().zip(below) {
                sum += w * v;
            }
            net_in.push(sum);
        }
        activations.push(net_in.iter().copied().map(sigmoid).collect());
        net_inputs.push(net_in);
    }
    Ok(ForwardPass {
        net_inputs,
        activations,
    })
}

/// One backpropagation step for a single (input, target) pair, returning the
/// corrections `alpha * delta * activation` for every weight and
/// `alpha * delta` for every bias. Adding them to the parameters descends the
/// squared-error surface: each correction equals `-alpha * dE/dtheta`.
pub fn backprop_deltas(
    net: &Network,
    x: &[f64],
    t: &[f64],
    alpha: f64,
) -> Result<Updates, NetError> {
    if t.len() != net.output_len() {
        return Err(NetError::ShapeMismatch(format!(
            "target has {} values, network expects {}",
            t.len(),
            net.output_len()
        )));
    }
    let fp = forward(net, x)?;
    let layers = net.weights.len();

    // Output layer error, then hidden errors from the top down, always
    // reading the pre-update weights.
    let mut deltas: Vec<Vec<f64>> = vec![Vec::new(); layers];
    deltas[layers - 1] = fp.net_inputs[layers - 1]
        .iter()
        .zip(fp.output())
        .zip(t)
        .map(|((&net_in, &y), &target)| (target - y) * sigmoid_prime(net_in))
        .collect();
    for l in (0..layers - 1).rev() {
        let upper = &deltas[l + 1];
        deltas[l] = fp.net_inputs[l]
            .iter()
            .enumerate()
            .map(|(j, &net_in)| {
                let mut delta_in = 0.0;
                for (k, d) in upper.iter().enumerate() {
                    delta_in += d * net.weights[l + 1][k][j];
                }
                delta_in * sigmoid_prime(net_in)
            })
            .collect();
    }

    let mut weights = Vec::with_capacity(layers);
    let mut biases = Vec::with_capacity(layers);
    for l in 0..layers {
        let below: &[f64] = if l == 0 { x } else { &fp.activations[l - 1] };
        weights.push(
            deltas[l]
                .iter()
                .map(|d| below.iter().map(|v| alpha * d * v).collect())
                .collect(),
        );
        biases.push(deltas[l].iter().map(|d| alpha * d).collect());
    }
    Ok(Updates { weights, biases })
}

impl Network {
    /// Add a set of corrections to the parameters.
    pub fn apply_updates(&mut self, updates: &Updates) {
        for (wl, ul) in self.weights.iter_mut().zip(&updates.weights) {
            for (wr, ur) in wl.iter_mut().zip(ul) {
                for (w, u) in wr.iter_mut().zip(ur) {
                    *w += u;
                }
            }
        }
        for (bl, ul) in self.biases.iter_mut().zip(&updates.biases) {
            for (b, u) in bl.iter_mut().zip(ul) {
                *b += u;
            }
        }
    }
}

/// Mean over examples of the per-example mean squared output error.
pub fn mean_squared_error(net: &Network, examples: &[LabeledExample]) -> Result<f64, NetError> {
    let m = net.output_len() as f64;
    let mut total = 0.0;
    for ex in examples {
        let fp = forward(net, &ex.features.values)?;
        let se: f64 = fp
            .output()
            .iter()
            .zip(&ex.target)
            .map(|(&y, &t)| (t - y) * (t - y))
            .sum();
        total += se / m;
    }
    Ok(total / examples.len() as f64)
}

/// Train by per-sample sequential updates in the given example order until
/// the epoch MSE (measured after the epoch's updates) reaches `mse_goal` or
/// `max_epochs` elapse. Deterministic for a fixed config and example order.
pub fn train(
    mut net: Network,
    examples: &[LabeledExample],
    cfg: &TrainConfig,
) -> Result<(Network, TrainReport), NetError> {
    if examples.is_empty() {
        return Err(NetError::ShapeMismatch("training set is empty".into()));
    }
    net.check_shapes()?;
    for ex in examples {
        if ex.features.values.len() != net.input_len() || ex.target.len() != net.output_len() {
            return Err(NetError::ShapeMismatch(format!(
                "example with {} features / {} targets does not fit network {:?}",
                ex.features.values.len(),
                ex.target.len(),
                net.layer_sizes
            )));
        }
    }
    let mut history = Vec::new();
    let mut goal_met = false;
    for epoch in 1..=cfg.max_epochs {
        for ex in examples {
            let updates = backprop_deltas(&net, &ex.features.values, &ex.target, cfg.learning_rate)?;
            net.apply_updates(&updates);
        }
        let mse = mean_squared_error(&net, examples)?;
        history.push(mse);
        if !mse.is_finite() {
            return Err(NetError::NonFiniteLoss { epoch });
        }
        if mse <= cfg.mse_goal {
            goal_met = true;
            break;
        }
    }
    let report = TrainReport {
        epochs_run: history.len(),
        final_mse: *history.last().expect("at least one epoch"),
        goal_met,
        mse_history: history,
    };
    Ok((net, report))
}

const MODEL_MAGIC: &str = "mutascan-model";
const MODEL_VERSION: u32 = 1;

/// Serialize a network as versioned text: a header line, a layer-sizes line,
/// then one parameter per line (per layer: weights row-major, then biases)
/// with 17 significant digits so the round trip is bit-exact.
pub fn save_model(net: &Network, path: &Path) -> Result<(), NetError> {
    net.check_shapes()?;
    let mut out = format!("{MODEL_MAGIC} {MODEL_VERSION}\n");
    out.push_str(
        &net.layer_sizes
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(" "),
    );
    out.push('\n');
    for l in 0..net.weights.len() {
        for row in &net.weights[l] {
            for w in row {
                out.push_str(&format!("{w:.16e}\n"));
            }
        }
        for b in &net.biases[l] {
            out.push_str(&format!("{b:.16e}\n"));
        }
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<Network, NetError> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| NetError::CorruptModel("empty file".into()))?;
    match header.split_once(' ') {
        Some((MODEL_MAGIC, version)) => {
            if version != MODEL_VERSION.to_string() {
                return Err(NetError::VersionMismatch {
                    found: version.to_string(),
                });
            }
        }
        _ => return Err(NetError::CorruptModel(format!("bad header {header:?}"))),
    }
    let sizes_line = lines
        .next()
        .ok_or_else(|| NetError::CorruptModel("missing layer sizes".into()))?;
    let layer_sizes: Vec<usize> = sizes_line
        .split_whitespace()
        .map(|tok| {
            tok.parse::<usize>()
                .map_err(|_| NetError::CorruptModel(format!("bad layer size {tok:?}")))
        })
        .collect::<Result<_, _>>()?;
    if layer_sizes.len() < 3 || layer_sizes.iter().any(|&s| s == 0) {
        return Err(NetError::CorruptModel(format!(
            "implausible layer sizes {layer_sizes:?}"
        )));
    }
    let mut params = lines.map(|line| {
        line.trim()
            .parse::<f64>()
            .map_err(|_| NetError::CorruptModel(format!("bad parameter {line:?}")))
    });
    let mut next = |what: &str| -> Result<f64, NetError> {
        params
            .next()
            .ok_or_else(|| NetError::CorruptModel(format!("truncated file at {what}")))?
    };
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for l in 0..layer_sizes.len() - 1 {
        let (lower, upper) = (layer_sizes[l], layer_sizes[l + 1]);
        let mut layer_weights = Vec::with_capacity(upper);
        for j in 0..upper {
            let mut row = Vec::with_capacity(lower);
            for i in 0..lower {
                row.push(next(&format!("weight {l}/{j}/{i}"))?);
            }
            layer_weights.push(row);
        }
        weights.push(layer_weights);
        let mut layer_biases = Vec::with_capacity(upper);
        for j in 0..upper {
            layer_biases.push(next(&format!("bias {l}/{j}"))?);
        }
        biases.push(layer_biases);
    }
    if params.next().is_some() {
        return Err(NetError::CorruptModel("trailing data after parameters".into()));
    }
    Ok(Network {
        layer_sizes,
        weights,
        biases,
        activation: Activation::LogisticSigmoid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::FeatureVector;

    fn example(features: Vec<f64>, target: Vec<f64>) -> LabeledExample {
        LabeledExample {
            features: FeatureVector { values: features },
            target,
        }
    }

    #[test]
    fn sigmoid_identities() {
        assert_eq!(sigmoid(0.0), 0.5);
        for u in [-3.0, -0.7, 0.0, 1.3, 4.0] {
            assert!((sigmoid(-u) - (1.0 - sigmoid(u))).abs() < 1e-15);
            let s = sigmoid(u);
            assert!((sigmoid_prime(u) - s * (1.0 - s)).abs() < 1e-15);
        }
    }

    #[test]
    fn init_is_deterministic_and_bounded() {
        let a = init_network(&[2, 2, 1], 7, 0.5).unwrap();
        let b = init_network(&[2, 2, 1], 7, 0.5).unwrap();
        assert_eq!(a, b);
        let c = init_network(&[2, 2, 1], 8, 0.5).unwrap();
        assert_ne!(a, c);
        for layer in a.weights.iter().flatten().flatten() {
            assert!(layer.abs() <= 0.5);
        }
    }

    #[test]
    fn zero_range_gives_zero_parameters() {
        let net = init_network(&[3, 2, 1], 1, 0.0).unwrap();
        assert!(net.weights.iter().flatten().flatten().all(|&w| w == 0.0));
        assert!(net.biases.iter().flatten().all(|&b| b == 0.0));
    }

    #[test]
    fn bad_shapes_rejected() {
        assert!(matches!(init_network(&[2, 1], 1, 0.5), Err(NetError::BadShape(_))));
        assert!(matches!(init_network(&[2, 0, 1], 1, 0.5), Err(NetError::BadShape(_))));
    }

    #[test]
    fn zero_parameters_give_half_activations() {
        let net = init_network(&[3, 4, 2], 1, 0.0).unwrap();
        let fp = forward(&net, &[0.3, -1.0, 9.0]).unwrap();
        for layer in &fp.activations {
            assert!(layer.iter().all(|&a| a == 0.5));
        }
    }

    #[test]
    fn scalar_chain_evaluates_sigmoid_composition() {
        // One input, one hidden, one output; unit weights and zero biases.
        let net = Network {
            layer_sizes: vec![1, 1, 1],
            weights: vec![vec![vec![1.0]], vec![vec![1.0]]],
            biases: vec![vec![0.0], vec![0.0]],
            activation: Activation::LogisticSigmoid,
        };
        let fp = forward(&net, &[0.0]).unwrap();
        assert_eq!(fp.activations[0][0], 0.5);
        assert!((fp.output()[0] - sigmoid(0.5)).abs() < 1e-15);
        assert!((fp.output()[0] - 0.622_459_331_201_854_6).abs() < 1e-12);
    }

    #[test]
    fn outputs_stay_in_open_unit_interval() {
        let net = init_network(&[4, 6, 6, 3], 3, 2.0).unwrap();
        let fp = forward(&net, &[100.0, -100.0, 0.0, 55.5]).unwrap();
        assert!(fp.output().iter().all(|&y| y > 0.0 && y < 1.0));
    }

    #[test]
    fn input_shape_mismatch_rejected() {
        let net = init_network(&[2, 2, 1], 1, 0.5).unwrap();
        assert!(matches!(
            forward(&net, &[1.0]),
            Err(NetError::ShapeMismatch(_))
        ));
        assert!(matches!(
            backprop_deltas(&net, &[1.0, 0.0], &[0.5, 0.5], 0.5),
            Err(NetError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn perfect_output_means_zero_updates() {
        let net = init_network(&[2, 3, 2], 5, 0.4).unwrap();
        let x = [0.25, 0.75];
        let y = forward(&net, &x).unwrap().output().to_vec();
        let updates = backprop_deltas(&net, &x, &y, 0.5).unwrap();
        assert!(updates.weights.iter().flatten().flatten().all(|&u| u == 0.0));
        assert!(updates.biases.iter().flatten().all(|&u| u == 0.0));
        // And a whole epoch of training on that pair is a no-op.
        let before = net.clone();
        let (after, report) = train(
            net,
            &[example(x.to_vec(), y)],
            &TrainConfig {
                max_epochs: 1,
                mse_goal: 1e-300,
                ..TrainConfig::default()
            },
        )
        .unwrap();
        assert_eq!(after, before);
        assert_eq!(report.epochs_run, 1);
    }

    #[test]
    fn updates_scale_linearly_with_learning_rate() {
        let net = init_network(&[3, 4, 2], 9, 0.5).unwrap();
        let x = [0.1, 0.9, 0.4];
        let t = [1.0, 0.0];
        let u1 = backprop_deltas(&net, &x, &t, 0.5).unwrap();
        let u3 = backprop_deltas(&net, &x, &t, 1.5).unwrap();
        for (a, b) in u1
            .weights
            .iter()
            .flatten()
            .flatten()
            .zip(u3.weights.iter().flatten().flatten())
        {
            assert!((b - 3.0 * a).abs() <= 1e-15 * b.abs().max(1.0));
        }
    }

    /// E = 1/2 sum (t - y)^2 for one example.
    fn half_squared_error(net: &Network, x: &[f64], t: &[f64]) -> f64 {
        forward(net, x)
            .unwrap()
            .output()
            .iter()
            .zip(t)
            .map(|(&y, &tk)| 0.5 * (tk - y) * (tk - y))
            .sum()
    }

    /// Central finite differences over every parameter.
    fn fd_gradient(net: &Network, x: &[f64], t: &[f64], h: f64) -> Updates {
        let mut grads = Updates {
            weights: net.weights.clone(),
            biases: net.biases.clone(),
        };
        for l in 0..net.weights.len() {
            for j in 0..net.weights[l].len() {
                for i in 0..net.weights[l][j].len() {
                    let mut plus = net.clone();
                    let mut minus = net.clone();
                    plus.weights[l][j][i] += h;
                    minus.weights[l][j][i] -= h;
                    grads.weights[l][j][i] = (half_squared_error(&plus, x, t)
                        - half_squared_error(&minus, x, t))
                        / (2.0 * h);
                }
                let mut plus = net.clone();
                let mut minus = net.clone();
                plus.biases[l][j] += h;
                minus.biases[l][j] -= h;
                grads.biases[l][j] = (half_squared_error(&plus, x, t)
                    - half_squared_error(&minus, x, t))
                    / (2.0 * h);
            }
        }
        grads
    }

    fn assert_close(analytic: f64, expected: f64) {
        let scale = analytic.abs().max(expected.abs());
        if scale < 1e-10 {
            assert!((analytic - expected).abs() < 1e-10);
        } else {
            assert!(
                ((analytic - expected) / scale).abs() < 1e-6,
                "{analytic} vs {expected}"
            );
        }
    }

    #[test]
    fn updates_match_finite_difference_gradient() {
        let alpha = 0.7;
        let net = init_network(&[3, 4, 3, 2], 11, 0.8).unwrap();
        let x = [0.2, 0.8, 0.5];
        let t = [1.0, 0.0];
        let updates = backprop_deltas(&net, &x, &t, alpha).unwrap();
        let grads = fd_gradient(&net, &x, &t, 1e-5);
        for l in 0..net.weights.len() {
            for j in 0..net.weights[l].len() {
                for i in 0..net.weights[l][j].len() {
                    assert_close(updates.weights[l][j][i], -alpha * grads.weights[l][j][i]);
                }
                assert_close(updates.biases[l][j], -alpha * grads.biases[l][j]);
            }
        }
    }

    #[test]
    fn update_is_descent_direction() {
        let net = init_network(&[2, 3, 1], 21, 0.5).unwrap();
        let x = [0.3, 0.9];
        let t = [1.0];
        let updates = backprop_deltas(&net, &x, &t, 1.0).unwrap();
        let grads = fd_gradient(&net, &x, &t, 1e-5);
        let mut inner = 0.0;
        for l in 0..net.weights.len() {
            for j in 0..net.weights[l].len() {
                for i in 0..net.weights[l][j].len() {
                    inner += updates.weights[l][j][i] * grads.weights[l][j][i];
                }
                inner += updates.biases[l][j] * grads.biases[l][j];
            }
        }
        assert!(inner < 0.0, "directional derivative must be negative");
    }

    fn xor_examples() -> Vec<LabeledExample> {
        vec![
            example(vec![0.0, 0.0], vec![0.0]),
            example(vec![0.0, 1.0], vec![1.0]),
            example(vec![1.0, 0.0], vec![1.0]),
            example(vec![1.0, 1.0], vec![0.0]),
        ]
    }

    #[test]
    fn xor_converges() {
        let net = init_network(&[2, 4, 4, 1], 3, 0.5).unwrap();
        let cfg = TrainConfig {
            learning_rate: 0.5,
            mse_goal: 1e-3,
            max_epochs: 100_000,
            seed: 3,
            init_range: 0.5,
        };
        let (_, report) = train(net, &xor_examples(), &cfg).unwrap();
        assert!(report.goal_met, "final mse {}", report.final_mse);
        assert!(report.final_mse <= 1e-3);
        assert_eq!(report.mse_history.len(), report.epochs_run);
    }

    #[test]
    fn loose_goal_stops_after_first_epoch() {
        let net = init_network(&[2, 4, 4, 1], 3, 0.5).unwrap();
        let cfg = TrainConfig {
            mse_goal: 10.0,
            ..TrainConfig::default()
        };
        let (_, report) = train(net, &xor_examples(), &cfg).unwrap();
        assert!(report.goal_met);
        assert_eq!(report.epochs_run, 1);
    }

    #[test]
    fn training_is_deterministic() {
        let cfg = TrainConfig {
            max_epochs: 50,
            ..TrainConfig::default()
        };
        let run = || {
            let net = init_network(&[2, 4, 4, 1], cfg.seed, cfg.init_range).unwrap();
            train(net, &xor_examples(), &cfg).unwrap()
        };
        let (net_a, report_a) = run();
        let (net_b, report_b) = run();
        assert_eq!(net_a, net_b);
        assert_eq!(report_a, report_b);
    }

    #[test]
    fn model_round_trips_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.txt");
        let net = init_network(&[3, 5, 4, 2], 17, 0.9).unwrap();
        save_model(&net, &path).unwrap();
        let loaded = load_model(&path).unwrap();
        assert_eq!(net, loaded);
        let x = [0.123, 0.456, 0.789];
        let a = forward(&net, &x).unwrap();
        let b = forward(&loaded, &x).unwrap();
        assert_eq!(a.output(), b.output());
    }

    #[test]
    fn truncated_model_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.txt");
        let net = init_network(&[2, 2, 1], 1, 0.5).unwrap();
        save_model(&net, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let truncated: Vec<&str> = text.lines().take(5).collect();
        fs::write(&path, truncated.join("\n")).unwrap();
        assert!(matches!(load_model(&path), Err(NetError::CorruptModel(_))));
    }

    #[test]
    fn version_mismatch_detected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.txt");
        let net = init_network(&[2, 2, 1], 1, 0.5).unwrap();
        save_model(&net, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, text.replacen("mutascan-model 1", "mutascan-model 2", 1)).unwrap();
        assert!(matches!(
            load_model(&path),
            Err(NetError::VersionMismatch { .. })
        ));
    }
}
