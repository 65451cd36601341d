use alloc::vec;
use alloc::vec::Vec;

use libm::{exp, log, pow, sqrt};
use rand::seq::SliceRandom;
#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use super::activation::ActivationKind;
use super::index::MultiIndex;
use super::network::Network;
use crate::error::{invalid, Error, Result};
use crate::rng::{normal, seeded};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "snake_case"))]
pub enum Loss {
    /// Mean over samples of `sum_k (f_k - y_k)^2`.
    Squared,
    /// Mean over samples of `-sum_k y_k log softmax(f)_k` (soft labels).
    CrossEntropy,
}

/// Plain mini-batch gradient descent with a step-decay schedule.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(default, deny_unknown_fields))]
pub struct TrainConfig {
    pub seed: u64,
    pub epochs: usize,
    /// 0 means full batch.
    pub batch_size: usize,
    pub lr: f64,
    /// Learning rate is multiplied by `decay` every `decay_every` epochs.
    pub decay: f64,
    pub decay_every: usize,
    pub target_loss: f64,
    /// Gradient norm cap per step.
    pub clip: Option<f64>,
    /// Initial `(alpha_1, alpha_2)` of every neuron.
    pub alpha_init: [f64; 2],
    /// Standard deviation multiplier of `N(0, 1/fan_in)` weight init.
    pub init_gain: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            epochs: 2000,
            batch_size: 0,
            lr: 0.1,
            decay: 0.5,
            decay_every: 1000,
            target_loss: 1e-8,
            clip: Some(10.0),
            alpha_init: [0.0, 0.0],
            init_gain: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub network: Network,
    pub loss: f64,
    pub epochs: usize,
}

/// Seeded random initialization: Gaussian weights, zero biases.
pub fn init_network(md: &MultiIndex, kind: ActivationKind, cfg: &TrainConfig) -> Network {
    let mut rng = seeded(cfg.seed);
    let mut theta = vec![0.0; md.param_count()];
    for o in md.hidden_offsets() {
        let s = cfg.init_gain / sqrt(o.cols as f64);
        for w in &mut theta[o.a..o.b] {
            *w = s * normal(&mut rng);
        }
        for i in 0..o.rows {
            theta[o.alpha + 2 * i] = cfg.alpha_init[0];
            theta[o.alpha + 2 * i + 1] = cfg.alpha_init[1];
        }
    }
    let r = md.readout_offsets();
    let s = cfg.init_gain / sqrt(r.cols as f64);
    for w in &mut theta[r.a..r.c] {
        *w = s * normal(&mut rng);
    }
    Network { dims: md.clone(), activation: kind, theta }
}

pub fn loss_and_grad(loss: Loss, out: &[f64], target: &[f64]) -> (f64, Vec<f64>) {
    match loss {
        Loss::Squared => {
            let g: Vec<f64> = out.iter().zip(target).map(|(f, y)| 2.0 * (f - y)).collect();
            let l = out.iter().zip(target).map(|(f, y)| (f - y) * (f - y)).sum();
            (l, g)
        }
        Loss::CrossEntropy => {
            let m = out.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let z: f64 = out.iter().map(|f| exp(f - m)).sum();
            let lse = m + log(z);
            let mass: f64 = target.iter().sum();
            let l = target.iter().zip(out).map(|(y, f)| -y * (f - lse)).sum();
            let g = out.iter().zip(target).map(|(f, y)| mass * exp(f - lse) - y).collect();
            (l, g)
        }
    }
}

pub fn dataset_loss(net: &Network, data: &[(Vec<f64>, Vec<f64>)], loss: Loss) -> Result<f64> {
    let mut total = 0.0;
    for (x, y) in data {
        total += loss_and_grad(loss, &net.forward(x)?, y).0;
    }
    Ok(total / data.len() as f64)
}

/// Trains a freshly initialized network.
pub fn train_regression(
    md: &MultiIndex,
    kind: ActivationKind,
    data: &[(Vec<f64>, Vec<f64>)],
    loss: Loss,
    cfg: &TrainConfig,
) -> Result<Trained> {
    if !kind.is_gradient_trainable() {
        return Err(Error::Unsupported(
            "singular activations are not gradient-trainable; use the constructive networks instead".into(),
        ));
    }
    train_from(init_network(md, kind, cfg), data, loss, cfg)
}

/// Continues training from `net`.
pub fn train_from(mut net: Network, data: &[(Vec<f64>, Vec<f64>)], loss: Loss, cfg: &TrainConfig) -> Result<Trained> {
    if !net.activation.is_gradient_trainable() {
        return Err(Error::Unsupported("singular activations are not gradient-trainable".into()));
    }
    if data.is_empty() {
        return Err(invalid("empty training set"));
    }
    for (x, y) in data {
        if x.len() != net.input_dim() {
            return Err(Error::DimensionMismatch { expected: net.input_dim(), got: x.len() });
        }
        if y.len() != net.output_dim() {
            return Err(Error::DimensionMismatch { expected: net.output_dim(), got: y.len() });
        }
    }
    let mut rng = seeded(cfg.seed ^ 0x5eed_0f_7a1b);
    let batch = if cfg.batch_size == 0 { data.len() } else { cfg.batch_size.min(data.len()) };
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut grad = vec![0.0; net.theta.len()];
    let mut current = dataset_loss(&net, data, loss)?;
    let mut epochs = 0;
    while epochs < cfg.epochs && current > cfg.target_loss {
        let lr = cfg.lr * pow(cfg.decay, (epochs / cfg.decay_every.max(1)) as f64);
        if batch < data.len() {
            order.shuffle(&mut rng);
        }
        for chunk in order.chunks(batch) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            for &i in chunk {
                let (x, y) = &data[i];
                let tr = net.trace(x)?;
                let (_, g) = loss_and_grad(loss, &tr.output, y);
                net.backprop(&tr, &g, &mut grad)?;
            }
            let scale = 1.0 / chunk.len() as f64;
            let norm = sqrt(grad.iter().map(|g| g * g).sum::<f64>()) * scale;
            let step = match cfg.clip {
                Some(c) if norm > c => lr * scale * c / norm,
                _ => lr * scale,
            };
            for (t, g) in net.theta.iter_mut().zip(&grad) {
                *t -= step * g;
            }
        }
        epochs += 1;
        current = dataset_loss(&net, data, loss)?;
        if !current.is_finite() {
            return Err(Error::Numeric("training diverged".into()));
        }
    }
    Ok(Trained { network: net, loss: current, epochs })
}
