use alloc::vec;
use alloc::vec::Vec;

use libm::{floor, log2, pow, sqrt};
#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use super::model::{ght_eval, Ght};
use crate::causal::{AcMapSpec, CausalMap, FiniteComplexityMap, PathWindow};
use crate::error::{invalid, Error, Result};
use crate::nn::{memorize_sequence, train_regression, ActivationKind, Loss, MultiIndex, Network, TrainConfig};
use crate::qas::QasSpace;
use crate::transformer::{fit_static_constructive, Budget, FitReport, StaticFitConfig};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(default, deny_unknown_fields))]
pub struct DynamicFitConfig {
    /// Hidden widths of every per-step encoder.
    pub encoder_hidden: Vec<usize>,
    pub encoder_activation: ActivationKind,
    /// Shared by every step, seed included, so equal targets give equal fits.
    pub encoder_train: TrainConfig,
    pub decoder_budget: Budget,
    pub decoder: StaticFitConfig,
    /// `L_rho` in the bias-perturbation scale.
    pub decoder_lipschitz: f64,
    pub perturbation_retries: usize,
    pub hyper_seed: u64,
}

impl Default for DynamicFitConfig {
    fn default() -> Self {
        Self {
            encoder_hidden: vec![16],
            encoder_activation: ActivationKind::smooth(),
            encoder_train: TrainConfig { epochs: 4000, decay_every: 2000, ..TrainConfig::default() },
            decoder_budget: Budget { n: 64, q: 16 },
            decoder: StaticFitConfig::default(),
            decoder_lipschitz: 1.0,
            perturbation_retries: 32,
            hyper_seed: 0,
        }
    }
}

/// Stage (i) output for one time index.
#[derive(Debug, Clone)]
pub struct StepFit {
    pub n: i64,
    pub network: Network,
    pub loss: f64,
    /// `max_x |f_hat(x) - f(t_n, x)|_2` over the training segments.
    pub sup_error: f64,
    pub inputs: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct DynamicReport {
    pub n_t: usize,
    pub memory: usize,
    pub encoder_dims: Vec<usize>,
    pub param_count: usize,
    pub hyper_width: usize,
    pub encoder_losses: Vec<f64>,
    pub encoder_sup_errors: Vec<f64>,
    /// Steps whose parameters coincided with an earlier step before perturbation.
    pub coincident_before: usize,
    pub perturbed: Vec<i64>,
    pub perturbation_scale: f64,
    pub perturbation_norm: f64,
    pub decoder: FitReport,
    pub memorization_residual: f64,
    /// `|theta_n(replayed) - theta_n(stored)|_inf` per step.
    pub replay_deviation: Vec<f64>,
    /// Largest difference quotient of the hypernetwork over the stored parameters.
    pub hyper_lipschitz: f64,
    pub window: Vec<i64>,
    pub within_window_errors: Vec<f64>,
    pub within_window_sup: f64,
    pub stored_thetas: Vec<Vec<f64>>,
}

fn norm2(v: &[f64]) -> f64 {
    sqrt(v.iter().map(|x| x * x).sum())
}

fn diff_inf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Stage (i): regress `f(t_n, .)` on the segments `x_{t_{n-m}:t_n}` of `paths`.
pub fn fit_step_encoder(
    target: &FiniteComplexityMap,
    paths: &[PathWindow],
    n: i64,
    cfg: &DynamicFitConfig,
) -> Result<StepFit> {
    if paths.is_empty() {
        return Err(invalid("no training paths"));
    }
    let mut data = Vec::with_capacity(paths.len());
    for path in paths {
        let seg = path.segment(n, target.memory)?.to_vec();
        let y = target.encode(path, n)?;
        data.push((seg, y));
    }
    let mut dims = vec![(target.memory + 1) * target.input_dim];
    dims.extend_from_slice(&cfg.encoder_hidden);
    dims.push(target.latent_dim);
    let md = MultiIndex::new(dims)?;
    let trained = train_regression(&md, cfg.encoder_activation, &data, Loss::Squared, &cfg.encoder_train)?;
    let mut sup_error: f64 = 0.0;
    for (x, y) in &data {
        let out = trained.network.forward(x)?;
        let d: Vec<f64> = out.iter().zip(y).map(|(a, b)| a - b).collect();
        sup_error = sup_error.max(norm2(&d));
    }
    let inputs = data.into_iter().map(|(x, _)| x).collect();
    Ok(StepFit { n, network: trained.network, loss: trained.loss, sup_error, inputs })
}

/// Smallest common shape: the deepest depth, then the widest width per layer
/// after extending shallower networks with copies of their last width.
pub fn common_dims(nets: &[Network]) -> Result<MultiIndex> {
    let first = nets.first().ok_or_else(|| invalid("no networks to pad"))?;
    let depth = nets.iter().map(|n| n.dims.depth()).max().unwrap_or(0);
    let mut widths = vec![0usize; depth];
    for net in nets {
        if net.dims.input() != first.dims.input() || net.dims.output() != first.dims.output() {
            return Err(invalid("encoders disagree on input or output width"));
        }
        let d = net.dims.dims();
        let own = net.dims.depth();
        for (j, w) in widths.iter_mut().enumerate() {
            let wj = if j < own { d[j + 1] } else if own == 0 { d[0] } else { d[own] };
            *w = (*w).max(wj);
        }
    }
    let mut dims = vec![first.dims.input()];
    dims.extend(widths);
    dims.push(first.dims.output());
    MultiIndex::new(dims)
}

/// Largest power of two strictly below `(eps / (8 L_rho))^{1/alpha} / sqrt(L)`.
pub fn perturbation_scale(eps: f64, l_rho: f64, alpha: f64, latent_dim: usize) -> Result<f64> {
    if !(eps > 0.0) || !(l_rho > 0.0) || !(alpha > 0.0) || latent_dim == 0 {
        return Err(invalid("perturbation scale needs eps, L_rho, alpha > 0 and L >= 1"));
    }
    let bound = pow(eps / (8.0 * l_rho), 1.0 / alpha) / sqrt(latent_dim as f64);
    if !(bound > 0.0) || !bound.is_finite() {
        return Err(Error::Numeric("perturbation bound is not a positive real".into()));
    }
    let mut b = pow(2.0, floor(log2(bound)));
    if b >= bound {
        b *= 0.5;
    }
    Ok(b)
}

fn readout_bias_shift(net: &Network, shift: f64) -> Result<Network> {
    let mut parts = net.parts();
    parts.c.iter_mut().for_each(|c| *c += shift);
    Network::from_parts(net.dims.clone(), net.activation, &parts)
}

fn all_distinct(nets: &[Network]) -> bool {
    (0..nets.len()).all(|i| (0..i).all(|j| nets[i].theta != nets[j].theta))
}

struct Distinct {
    nets: Vec<Network>,
    coincident: usize,
    perturbed: Vec<usize>,
    scale: f64,
    norm: f64,
}

/// Stage (iii): the `k`-th repeat of an earlier parameter vector gets its
/// readout bias shifted by `b k / K` in every coordinate; `b` halves on retry.
fn make_distinct(nets: Vec<Network>, b0: f64, retries: usize) -> Result<Distinct> {
    let count = nets.len();
    let mut repeat = vec![0usize; count];
    for i in 0..count {
        repeat[i] = (0..i).filter(|&r| nets[r].theta == nets[i].theta).count();
    }
    let coincident = repeat.iter().filter(|&&r| r > 0).count();
    if coincident == 0 {
        return Ok(Distinct { nets, coincident, perturbed: Vec::new(), scale: b0, norm: 0.0 });
    }
    let perturbed: Vec<usize> = (0..count).filter(|&i| repeat[i] > 0).collect();
    let mut b = b0;
    for _ in 0..=retries {
        let mut out = nets.clone();
        let mut norm: f64 = 0.0;
        for &i in &perturbed {
            let shift = b * repeat[i] as f64 / count as f64;
            out[i] = readout_bias_shift(&nets[i], shift)?;
            norm = norm.max(shift * sqrt(nets[i].dims.output() as f64));
        }
        if all_distinct(&out) {
            return Ok(Distinct { nets: out, coincident, perturbed, scale: b, norm });
        }
        b *= 0.5;
    }
    Err(Error::Numeric(alloc::format!(
        "{coincident} of {count} encoder parameter vectors stay coincident after {retries} perturbation retries (last scale {b})"
    )))
}

/// Stages (ii) to (v) on per-step encoder fits covering `-N_T..=N_T`.
pub fn assemble_dynamic(
    target: &FiniteComplexityMap,
    steps: Vec<StepFit>,
    paths: &[PathWindow],
    n_t: usize,
    space: &QasSpace,
    eps: f64,
    cfg: &DynamicFitConfig,
) -> Result<(Ght, DynamicReport)> {
    if n_t == 0 {
        return Err(invalid("the horizon N_T must be at least 1"));
    }
    let h = n_t as i64;
    let window: Vec<i64> = (-h..=h).collect();
    if steps.len() != window.len() || steps.iter().zip(&window).any(|(s, n)| s.n != *n) {
        return Err(invalid("step fits must cover -N_T..=N_T in order"));
    }
    let nets: Vec<Network> = steps.iter().map(|s| s.network.clone()).collect();
    let dims = common_dims(&nets)?;
    let padded = nets.iter().map(|n| n.pad_to(&dims)).collect::<Result<Vec<_>>>()?;

    let b0 = perturbation_scale(eps, cfg.decoder_lipschitz, target.holder_exponent, target.latent_dim)?;
    let distinct = make_distinct(padded, b0, cfg.perturbation_retries)?;
    let nets = distinct.nets;

    let mut latent = Vec::new();
    for (step, net) in steps.iter().zip(&nets) {
        for x in &step.inputs {
            latent.push(net.forward(x)?);
        }
    }
    let rho = |u: &[f64]| target.decode(u);
    let (decoder, decoder_report) = fit_static_constructive(rho, &latent, None, space, cfg.decoder_budget, &cfg.decoder)?;

    let p = dims.param_count();
    let pairs: Vec<(Vec<f64>, Vec<f64>)> =
        nets.windows(2).map(|w| (w[0].theta.clone(), w[1].theta.clone())).collect();
    let memo = memorize_sequence(&pairs, p, n_t, cfg.hyper_seed)?;
    let hyper_width = memo.network.dims.dims()[1];

    let mut hyper_lipschitz: f64 = 0.0;
    let images = nets.iter().map(|n| memo.network.forward(&n.theta)).collect::<Result<Vec<_>>>()?;
    for i in 0..nets.len() {
        for j in 0..i {
            let num: Vec<f64> = images[i].iter().zip(&images[j]).map(|(a, b)| a - b).collect();
            let den: Vec<f64> = nets[i].theta.iter().zip(&nets[j].theta).map(|(a, b)| a - b).collect();
            hyper_lipschitz = hyper_lipschitz.max(norm2(&num) / norm2(&den));
        }
    }

    let ght = Ght::new(
        decoder,
        memo.network,
        nets[0].theta.clone(),
        n_t,
        dims.clone(),
        cfg.encoder_activation,
        target.memory,
    )?;
    let replay_deviation: Vec<f64> =
        window.iter().zip(&nets).map(|(&n, net)| diff_inf(ght.schedule().theta(n), &net.theta)).collect();

    let mut within_window_errors = Vec::with_capacity(window.len());
    for &n in &window {
        let mut worst: f64 = 0.0;
        for path in paths {
            let d = space.distance(&target.eval(path, n)?, &ght_eval(&ght, path, n)?)?;
            worst = worst.max(d);
        }
        within_window_errors.push(worst);
    }
    let within_window_sup = within_window_errors.iter().copied().fold(0.0, f64::max);

    let report = DynamicReport {
        n_t,
        memory: target.memory,
        encoder_dims: dims.dims().to_vec(),
        param_count: p,
        hyper_width,
        encoder_losses: steps.iter().map(|s| s.loss).collect(),
        encoder_sup_errors: steps.iter().map(|s| s.sup_error).collect(),
        coincident_before: distinct.coincident,
        perturbed: distinct.perturbed.iter().map(|&i| window[i]).collect(),
        perturbation_scale: distinct.scale,
        perturbation_norm: distinct.norm,
        decoder: decoder_report,
        memorization_residual: memo.residual,
        replay_deviation,
        hyper_lipschitz,
        window,
        within_window_errors,
        within_window_sup,
        stored_thetas: nets.into_iter().map(|n| n.theta).collect(),
    };
    Ok((ght, report))
}

/// The full pipeline against `F^{f_{eps/4}, rho_{eps/4}}`, fitting steps in order.
pub fn fit_dynamic(
    target: &AcMapSpec,
    paths: &[PathWindow],
    n_t: usize,
    space: &QasSpace,
    eps: f64,
    cfg: &DynamicFitConfig,
) -> Result<(Ght, DynamicReport)> {
    if !(eps > 0.0) {
        return Err(invalid("eps must be positive"));
    }
    let map = target.at(eps / 4.0)?;
    let h = n_t as i64;
    let steps = (-h..=h).map(|n| fit_step_encoder(&map, paths, n, cfg)).collect::<Result<Vec<_>>>()?;
    assemble_dynamic(&map, steps, paths, n_t, space, eps, cfg)
}
