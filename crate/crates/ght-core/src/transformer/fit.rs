use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use libm::{pow, sqrt};
#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use super::model::{gt_eval, GeometricTransformer};
use crate::error::{invalid, Error, Result};
use crate::metric::{project_simplex, simplex_projection_vjp};
use crate::nn::{init_network, train_regression, ActivationKind, Loss, MultiIndex, Network, TrainConfig};
use crate::qas::{QasPoint, QasSpace, QuantizationCode};

/// Number of codes `N` and quantization level `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Budget {
    pub n: usize,
    pub q: usize,
}

/// How the constructive fit realizes nearest-center classification.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(tag = "mode", rename_all = "snake_case"))]
pub enum EncoderMode {
    /// Linear logits `beta (<c_i, x> - |c_i|^2 / 2)` with
    /// `beta = 2 sharpness / separation^2`; exact one-hot at every center
    /// once `sharpness > 1`.
    ClosedForm { sharpness: f64 },
    /// A network of the given hidden widths regressed onto one-hot labels.
    /// Singular activations fall back to the closed form.
    Trained { hidden: Vec<usize>, train: TrainConfig },
}

impl Default for EncoderMode {
    fn default() -> Self {
        Self::ClosedForm { sharpness: 1e4 }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(default, deny_unknown_fields))]
pub struct StaticFitConfig {
    pub activation: ActivationKind,
    pub encoder: EncoderMode,
    /// Hölder constant and exponent of the target, if known; enables the
    /// error decomposition check.
    pub holder_constant: Option<f64>,
    pub holder_exponent: f64,
}

impl Default for StaticFitConfig {
    fn default() -> Self {
        Self {
            activation: ActivationKind::smooth(),
            encoder: EncoderMode::default(),
            holder_constant: None,
            holder_exponent: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct FitReport {
    /// Indices of the chosen centers in the training inputs.
    pub centers: Vec<usize>,
    pub covering_radius: f64,
    pub separation: f64,
    /// `d(f(x_i), Q_q(z_i))` per center.
    pub quantization_errors: Vec<f64>,
    /// `sup_x d(gt(x), Q_q(z_{i(x)}))` with `i(x)` the nearest center.
    /// Only defined for the constructive fit.
    pub classification_defect: Option<f64>,
    /// Error per evaluation point.
    pub errors: Vec<f64>,
    pub sup_error: f64,
    /// `L r^alpha + max eps_Q + defect` when the Hölder constant is given.
    pub bound: Option<f64>,
    pub encoder_route: String,
    pub train_loss: Option<f64>,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            core::cmp::Ordering::Less => return true,
            core::cmp::Ordering::Greater => return false,
            _ => {}
        }
    }
    false
}

/// Farthest-point traversal from the lexicographically smallest input.
/// Stops at `n` centers or when every input is already a center.
pub fn farthest_point_net(xs: &[Vec<f64>], n: usize) -> Vec<usize> {
    if xs.is_empty() || n == 0 {
        return Vec::new();
    }
    let mut start = 0;
    for i in 1..xs.len() {
        if lex_less(&xs[i], &xs[start]) {
            start = i;
        }
    }
    let mut centers = vec![start];
    let mut nearest: Vec<f64> = xs.iter().map(|x| dist(x, &xs[start])).collect();
    while centers.len() < n {
        let mut best = 0;
        for i in 1..xs.len() {
            if nearest[i] > nearest[best] {
                best = i;
            }
        }
        if nearest[best] == 0.0 {
            break;
        }
        centers.push(best);
        for (d, x) in nearest.iter_mut().zip(xs) {
            *d = d.min(dist(x, &xs[best]));
        }
    }
    centers
}

/// Index (into `centers`) of the nearest center; ties go to the lower index.
pub fn nearest_center(x: &[f64], centers: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centers.iter().enumerate() {
        let d = dist(x, c);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

fn min_separation(centers: &[Vec<f64>]) -> f64 {
    let mut sep = f64::INFINITY;
    for i in 0..centers.len() {
        for j in 0..i {
            sep = sep.min(dist(&centers[i], &centers[j]));
        }
    }
    sep
}

/// The closed-form nearest-center encoder as a depth-0 network.
pub fn nearest_center_encoder(centers: &[Vec<f64>], sharpness: f64, kind: ActivationKind) -> Result<Network> {
    let n = centers.len();
    let dim = centers[0].len();
    let sep = min_separation(centers);
    let beta = if n == 1 { 0.0 } else { 2.0 * sharpness / (sep * sep) };
    if !beta.is_finite() {
        return Err(Error::Numeric("centers too close for the nearest-center encoder".into()));
    }
    let md = MultiIndex::new(vec![dim, n])?;
    let mut theta = Vec::with_capacity(md.param_count());
    for c in centers {
        theta.extend(c.iter().map(|v| beta * v));
    }
    for c in centers {
        theta.push(-0.5 * beta * c.iter().map(|v| v * v).sum::<f64>());
    }
    Network::new(md, kind, theta)
}

fn check_inputs(train_x: &[Vec<f64>], budget: Budget) -> Result<usize> {
    if train_x.is_empty() {
        return Err(invalid("no training inputs"));
    }
    if budget.n == 0 || budget.q == 0 {
        return Err(invalid("budgets must be positive"));
    }
    let dim = train_x[0].len();
    if dim == 0 || train_x.iter().any(|x| x.len() != dim) {
        return Err(invalid("training inputs must share a positive dimension"));
    }
    Ok(dim)
}

/// Errors of `gt` against `targets` at `xs`.
pub fn evaluate_errors(gt: &GeometricTransformer, xs: &[Vec<f64>], targets: &[QasPoint]) -> Result<Vec<f64>> {
    xs.iter().zip(targets).map(|(x, y)| gt.space().distance(y, &gt_eval(gt, x)?)).collect()
}

/// Builds a geometric transformer by covering the inputs with a
/// farthest-point net, encoding the target at each center and routing every
/// input to its nearest center. Errors are measured on `eval_x` (defaults to
/// the training inputs).
pub fn fit_static_constructive<F>(
    f: F,
    train_x: &[Vec<f64>],
    eval_x: Option<&[Vec<f64>]>,
    space: &QasSpace,
    budget: Budget,
    cfg: &StaticFitConfig,
) -> Result<(GeometricTransformer, FitReport)>
where
    F: Fn(&[f64]) -> Result<QasPoint>,
{
    check_inputs(train_x, budget)?;
    let idx = farthest_point_net(train_x, budget.n);
    let centers: Vec<Vec<f64>> = idx.iter().map(|&i| train_x[i].clone()).collect();
    let mut codes = Vec::with_capacity(centers.len());
    let mut quantization_errors = Vec::with_capacity(centers.len());
    for c in &centers {
        let (code, err) = space.encode_point(&f(c)?, budget.q)?;
        codes.push(code);
        quantization_errors.push(err);
    }

    let (encoder, route, train_loss) = match (&cfg.encoder, cfg.activation) {
        (EncoderMode::ClosedForm { sharpness }, kind) => {
            (nearest_center_encoder(&centers, *sharpness, kind)?, "closed_form", None)
        }
        (EncoderMode::Trained { .. }, ActivationKind::Singular) => {
            (nearest_center_encoder(&centers, 1e4, ActivationKind::Singular)?, "closed_form_singular", None)
        }
        (EncoderMode::Trained { hidden, train }, kind) => {
            let mut dims = vec![train_x[0].len()];
            dims.extend_from_slice(hidden);
            dims.push(centers.len());
            let data: Vec<(Vec<f64>, Vec<f64>)> = train_x
                .iter()
                .map(|x| {
                    let mut y = vec![0.0; centers.len()];
                    y[nearest_center(x, &centers)] = 1.0;
                    (x.clone(), y)
                })
                .collect();
            let t = train_regression(&MultiIndex::new(dims)?, kind, &data, Loss::Squared, train)?;
            (t.network, "trained", Some(t.loss))
        }
    };
    let gt = GeometricTransformer::new(space.clone(), encoder, codes)?;

    let eval = eval_x.unwrap_or(train_x);
    let targets = eval.iter().map(|x| f(x)).collect::<Result<Vec<_>>>()?;
    let errors = evaluate_errors(&gt, eval, &targets)?;
    let mut defect: f64 = 0.0;
    let mut radius: f64 = 0.0;
    for x in eval {
        let i = nearest_center(x, &centers);
        radius = radius.max(dist(x, &centers[i]));
        defect = defect.max(space.distance(&gt_eval(&gt, x)?, &gt.points()[i])?);
    }
    let sup_error = errors.iter().copied().fold(0.0, f64::max);
    let max_q = quantization_errors.iter().copied().fold(0.0, f64::max);
    let bound = cfg.holder_constant.map(|l| l * pow(radius, cfg.holder_exponent) + max_q + defect);
    let report = FitReport {
        centers: idx,
        covering_radius: radius,
        separation: if centers.len() > 1 { min_separation(&centers) } else { 0.0 },
        quantization_errors,
        classification_defect: Some(defect),
        errors,
        sup_error,
        bound,
        encoder_route: route.into(),
        train_loss,
    };
    Ok((gt, report))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(default, deny_unknown_fields))]
pub struct End2EndConfig {
    pub activation: ActivationKind,
    pub hidden: Vec<usize>,
    pub train: TrainConfig,
    /// Exponent of the per-sample loss `d(f(x), gt(x))^power`.
    pub loss_power: f64,
    /// Step of the forward differences along simplex edges.
    pub fd_step: f64,
    /// Start from the closed-form nearest-center encoder (padded to the
    /// requested shape when possible) instead of a random network.
    pub warm_start: Option<f64>,
}

impl Default for End2EndConfig {
    fn default() -> Self {
        Self {
            activation: ActivationKind::smooth(),
            hidden: Vec::new(),
            train: TrainConfig { epochs: 200, lr: 0.05, ..TrainConfig::default() },
            loss_power: 2.0,
            fd_step: 1e-6,
            warm_start: Some(20.0),
        }
    }
}

fn per_sample(space: &QasSpace, gt: &GeometricTransformer, target: &QasPoint, w: &[f64], power: f64) -> Result<f64> {
    let y = space.mix(w, gt.points())?;
    Ok(pow(space.distance(target, &y)?, power))
}

/// Gradient training of the encoder against `sum_x d(f(x), gt(x))^power`.
///
/// The derivative in the mixing weights is taken by forward differences
/// along the edges `e_n - w` of the simplex, pulled back through the simplex
/// projection and backpropagated through the encoder. Codes are either given
/// or built from a farthest-point net as in the constructive fit.
pub fn fit_static_end2end<F>(
    f: F,
    train_x: &[Vec<f64>],
    eval_x: Option<&[Vec<f64>]>,
    space: &QasSpace,
    budget: Budget,
    codes: Option<Vec<QuantizationCode>>,
    cfg: &End2EndConfig,
) -> Result<(GeometricTransformer, FitReport)>
where
    F: Fn(&[f64]) -> Result<QasPoint>,
{
    if !cfg.activation.is_gradient_trainable() {
        return Err(Error::Unsupported("end-to-end training needs smooth or classical activations".into()));
    }
    let dim = check_inputs(train_x, budget)?;
    let idx = farthest_point_net(train_x, budget.n);
    let centers: Vec<Vec<f64>> = idx.iter().map(|&i| train_x[i].clone()).collect();
    let (codes, quantization_errors) = match codes {
        Some(c) => {
            let n = c.len();
            (c, vec![0.0; n])
        }
        None => {
            let mut codes = Vec::new();
            let mut errs = Vec::new();
            for c in &centers {
                let (code, err) = space.encode_point(&f(c)?, budget.q)?;
                codes.push(code);
                errs.push(err);
            }
            (codes, errs)
        }
    };
    let n_codes = codes.len();
    let mut dims = vec![dim];
    dims.extend_from_slice(&cfg.hidden);
    dims.push(n_codes);
    let md = MultiIndex::new(dims)?;
    let warm = match cfg.warm_start {
        Some(sharp) if centers.len() == n_codes => nearest_center_encoder(&centers, sharp, cfg.activation)
            .and_then(|e| e.pad_to(&md))
            .ok(),
        _ => None,
    };
    let encoder = warm.unwrap_or_else(|| init_network(&md, cfg.activation, &cfg.train));
    let mut gt = GeometricTransformer::new(space.clone(), encoder, codes)?;

    let targets = train_x.iter().map(|x| f(x)).collect::<Result<Vec<_>>>()?;
    let objective = |gt: &GeometricTransformer| -> Result<f64> {
        let mut s = 0.0;
        for (x, y) in train_x.iter().zip(&targets) {
            let w = project_simplex(&gt.encoder().forward(x)?)?;
            s += per_sample(space, gt, y, &w, cfg.loss_power)?;
        }
        Ok(s / train_x.len() as f64)
    };
    let mut loss = objective(&gt)?;
    let mut best = (loss, gt.encoder().clone());
    let t = cfg.fd_step;
    let tc = &cfg.train;
    for epoch in 0..tc.epochs {
        if loss <= tc.target_loss {
            break;
        }
        let lr = tc.lr * pow(tc.decay, (epoch / tc.decay_every.max(1)) as f64);
        let net = gt.encoder().clone();
        let mut grad = vec![0.0; net.theta.len()];
        for (x, y) in train_x.iter().zip(&targets) {
            let tr = net.trace(x)?;
            let w = project_simplex(&tr.output)?;
            let base = per_sample(space, &gt, y, &w, cfg.loss_power)?;
            let mut dw = vec![0.0; n_codes];
            for (k, slot) in dw.iter_mut().enumerate() {
                let shifted: Vec<f64> =
                    w.iter().enumerate().map(|(j, &wj)| (1.0 - t) * wj + if j == k { t } else { 0.0 }).collect();
                *slot = (per_sample(space, &gt, y, &shifted, cfg.loss_power)? - base) / t;
            }
            let gu = simplex_projection_vjp(&w, &dw);
            net.backprop(&tr, &gu, &mut grad)?;
        }
        let scale = 1.0 / train_x.len() as f64;
        let norm = sqrt(grad.iter().map(|g| g * g).sum::<f64>()) * scale;
        let step = match tc.clip {
            Some(c) if norm > c => lr * scale * c / norm,
            _ => lr * scale,
        };
        let mut next = net;
        for (th, g) in next.theta.iter_mut().zip(&grad) {
            *th -= step * g;
        }
        gt = gt.with_encoder(next)?;
        loss = objective(&gt)?;
        if !loss.is_finite() {
            return Err(Error::Numeric("end-to-end training diverged".into()));
        }
        if loss < best.0 {
            best = (loss, gt.encoder().clone());
        }
    }
    let gt = gt.with_encoder(best.1)?;
    let eval = eval_x.unwrap_or(train_x);
    let eval_targets = eval.iter().map(|x| f(x)).collect::<Result<Vec<_>>>()?;
    let errors = evaluate_errors(&gt, eval, &eval_targets)?;
    let sup_error = errors.iter().copied().fold(0.0, f64::max);
    let radius = eval.iter().map(|x| dist(x, &centers[nearest_center(x, &centers)])).fold(0.0, f64::max);
    let report = FitReport {
        centers: idx,
        covering_radius: radius,
        separation: if centers.len() > 1 { min_separation(&centers) } else { 0.0 },
        quantization_errors,
        classification_defect: None,
        errors,
        sup_error,
        bound: None,
        encoder_route: "end_to_end".into(),
        train_loss: Some(best.0),
    };
    Ok((gt, report))
}
