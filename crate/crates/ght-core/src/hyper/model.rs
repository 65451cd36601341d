use alloc::vec::Vec;

use crate::causal::{CausalMap, PathWindow};
use crate::error::{invalid, Error, Result};
use crate::nn::{ActivationKind, MultiIndex, Network};
use crate::qas::QasPoint;
use crate::transformer::{gt_eval, GeometricTransformer};

/// `n -> theta_n` for `n` in `-N..=N`, clamped outside:
/// `theta_{-N} = theta_init`, `theta_{n+1} = h(theta_n)` for `-N <= n < N`.
#[derive(Debug, Clone)]
pub struct ThetaSchedule {
    horizon: usize,
    encoders: Vec<Network>,
}

impl ThetaSchedule {
    pub fn build(
        hyper: &Network,
        theta_init: &[f64],
        horizon: usize,
        dims: &MultiIndex,
        activation: ActivationKind,
    ) -> Result<Self> {
        let mut encoders = Vec::with_capacity(2 * horizon + 1);
        let mut theta = theta_init.to_vec();
        for step in 0..=2 * horizon {
            if step > 0 {
                theta = hyper.forward(&theta)?;
                if theta.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Numeric(alloc::format!("schedule left the reals at step {step}")));
                }
            }
            encoders.push(Network::new(dims.clone(), activation, theta.clone())?);
        }
        Ok(Self { horizon, encoders })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    fn slot(&self, n: i64) -> usize {
        let h = self.horizon as i64;
        (n.clamp(-h, h) + h) as usize
    }

    pub fn theta(&self, n: i64) -> &[f64] {
        &self.encoders[self.slot(n)].theta
    }

    pub fn encoder(&self, n: i64) -> &Network {
        &self.encoders[self.slot(n)]
    }
}

/// A geometric hypertransformer: one shared decoder `rho_hat`, encoders whose
/// parameters follow the hypernetwork recursion inside `|n| <= N` and freeze
/// outside.
#[derive(Debug, Clone)]
pub struct Ght {
    decoder: GeometricTransformer,
    hyper: Network,
    theta_init: Vec<f64>,
    horizon: usize,
    encoder_dims: MultiIndex,
    encoder_activation: ActivationKind,
    memory: usize,
    schedule: ThetaSchedule,
}

impl Ght {
    pub fn new(
        decoder: GeometricTransformer,
        hyper: Network,
        theta_init: Vec<f64>,
        horizon: usize,
        encoder_dims: MultiIndex,
        encoder_activation: ActivationKind,
        memory: usize,
    ) -> Result<Self> {
        let p = encoder_dims.param_count();
        if hyper.input_dim() != p || hyper.output_dim() != p {
            return Err(Error::DimensionMismatch { expected: p, got: hyper.input_dim().max(hyper.output_dim()) });
        }
        if theta_init.len() != p {
            return Err(Error::DimensionMismatch { expected: p, got: theta_init.len() });
        }
        if encoder_dims.output() != decoder.input_dim() {
            return Err(Error::DimensionMismatch { expected: decoder.input_dim(), got: encoder_dims.output() });
        }
        if encoder_dims.input() % (memory + 1) != 0 {
            return Err(invalid("encoder input width must be (m + 1) d"));
        }
        let schedule = ThetaSchedule::build(&hyper, &theta_init, horizon, &encoder_dims, encoder_activation)?;
        Ok(Self { decoder, hyper, theta_init, horizon, encoder_dims, encoder_activation, memory, schedule })
    }

    pub fn decoder(&self) -> &GeometricTransformer {
        &self.decoder
    }

    pub fn hyper(&self) -> &Network {
        &self.hyper
    }

    pub fn theta_init(&self) -> &[f64] {
        &self.theta_init
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn encoder_dims(&self) -> &MultiIndex {
        &self.encoder_dims
    }

    pub fn encoder_activation(&self) -> ActivationKind {
        self.encoder_activation
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    /// State dimension `d`.
    pub fn state_dim(&self) -> usize {
        self.encoder_dims.input() / (self.memory + 1)
    }

    pub fn schedule(&self) -> &ThetaSchedule {
        &self.schedule
    }

    pub fn param_count(&self) -> usize {
        self.encoder_dims.param_count()
    }
}

pub fn theta_unroll(ght: &Ght, n: i64) -> &[f64] {
    ght.schedule.theta(n)
}

/// `rho_hat(f_hat_{theta_n}(x_{t_{n-m}:t_n}))`.
pub fn ght_eval(ght: &Ght, path: &PathWindow, n: i64) -> Result<QasPoint> {
    if path.dim() != ght.state_dim() {
        return Err(Error::DimensionMismatch { expected: ght.state_dim(), got: path.dim() });
    }
    let seg = path.segment(n, ght.memory)?;
    let u = ght.schedule.encoder(n).forward(seg)?;
    gt_eval(&ght.decoder, &u)
}

impl CausalMap for Ght {
    fn memory(&self) -> usize {
        self.memory
    }

    fn eval(&self, path: &PathWindow, n: i64) -> Result<QasPoint> {
        ght_eval(self, path, n)
    }
}
