use alloc::vec::Vec;

use libm::{exp, pow, sqrt};
#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use super::grid::PathWindow;
use crate::error::{invalid, Error, Result};

fn norm(x: &[f64]) -> f64 {
    sqrt(x.iter().map(|v| v * v).sum())
}

/// Compact `K` in `R^d`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(tag = "shape", rename_all = "snake_case"))]
pub enum BaseSet {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

impl BaseSet {
    pub fn interval(lo: f64, hi: f64) -> Self {
        Self::Box { lo: alloc::vec![lo], hi: alloc::vec![hi] }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Box { lo, .. } => lo.len(),
            Self::Ball { center, .. } => center.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Box { lo, hi } => {
                if lo.is_empty() || lo.len() != hi.len() {
                    return Err(invalid("box bounds must be non-empty and of equal length"));
                }
                if lo.iter().zip(hi).any(|(a, b)| !(a <= b) || !a.is_finite() || !b.is_finite()) {
                    return Err(invalid("box needs finite lo <= hi"));
                }
            }
            Self::Ball { center, radius } => {
                if center.is_empty() || !(*radius >= 0.0 && radius.is_finite()) {
                    return Err(invalid("ball needs a centre and a finite radius >= 0"));
                }
            }
        }
        Ok(())
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Self::Box { lo, hi } => sqrt(lo.iter().zip(hi).map(|(a, b)| (b - a) * (b - a)).sum()),
            Self::Ball { radius, .. } => 2.0 * radius,
        }
    }

    /// Euclidean distance from `x` to the set.
    pub fn distance(&self, x: &[f64]) -> f64 {
        match self {
            Self::Box { lo, hi } => sqrt(
                x.iter()
                    .zip(lo.iter().zip(hi))
                    .map(|(v, (a, b))| {
                        let e = if v < a {
                            a - v
                        } else if v > b {
                            v - b
                        } else {
                            0.0
                        };
                        e * e
                    })
                    .sum(),
            ),
            Self::Ball { center, radius } => {
                let r: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
                (norm(&r) - radius).max(0.0)
            }
        }
    }

    /// Positive inside (distance to the boundary), minus the distance outside.
    pub fn signed_margin(&self, x: &[f64]) -> f64 {
        match self {
            Self::Box { lo, hi } => {
                let d = self.distance(x);
                if d > 0.0 {
                    -d
                } else {
                    x.iter().zip(lo.iter().zip(hi)).map(|(v, (a, b))| (v - a).min(b - v)).fold(f64::INFINITY, f64::min)
                }
            }
            Self::Ball { center, radius } => {
                let r: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
                radius - norm(&r)
            }
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.signed_margin(x) >= 0.0
    }
}

/// Nondecreasing weight `w: N -> [0, inf)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(tag = "kind", rename_all = "snake_case"))]
pub enum WeightFn {
    Constant { value: f64 },
    Affine { intercept: f64, slope: f64 },
    Power { scale: f64, exponent: f64 },
    /// `values[i]`, extended by the last entry.
    Table { values: Vec<f64> },
}

impl WeightFn {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Self::Constant { value } => *value >= 0.0 && value.is_finite(),
            Self::Affine { intercept, slope } => *intercept >= 0.0 && *slope >= 0.0 && (intercept + slope).is_finite(),
            Self::Power { scale, exponent } => *scale >= 0.0 && *exponent >= 0.0 && (scale + exponent).is_finite(),
            Self::Table { values } => {
                !values.is_empty()
                    && values.iter().all(|v| *v >= 0.0 && v.is_finite())
                    && values.windows(2).all(|w| w[0] <= w[1])
            }
        };
        if ok {
            Ok(())
        } else {
            Err(invalid("weight function must be finite, nonnegative and nondecreasing"))
        }
    }

    pub fn eval(&self, i: u64) -> f64 {
        match self {
            Self::Constant { value } => *value,
            Self::Affine { intercept, slope } => intercept + slope * i as f64,
            Self::Power { scale, exponent } => scale * pow(i as f64, *exponent),
            Self::Table { values } => values[(i as usize).min(values.len() - 1)],
        }
    }
}

/// Parameters of the exponential-envelope class: `|x_0| <= C_0` and
/// `|x_n| <= C* / sqrt(eps) * sqrt(C_n) * exp(-n C_n delta_minus / 2)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(deny_unknown_fields))]
pub struct ExpEnvelope {
    pub c0: f64,
    pub c_star: f64,
    /// `C_0, C_1, ...`; indices past the end reuse the last entry.
    pub c: Vec<f64>,
    pub eps: f64,
    pub delta_minus: f64,
}

impl ExpEnvelope {
    pub fn validate(&self) -> Result<()> {
        if !(self.c0 >= 0.0) || !(self.c_star > 0.0) || !(self.delta_minus > 0.0) {
            return Err(invalid("envelope needs C_0 >= 0, C* > 0 and delta_minus > 0"));
        }
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(invalid("envelope eps must lie in (0, 1]"));
        }
        if self.c.is_empty() || self.c.iter().any(|c| !(*c > 0.0 && c.is_finite())) {
            return Err(invalid("envelope constants C_n must be positive"));
        }
        Ok(())
    }

    pub fn c_n(&self, n: u64) -> f64 {
        self.c[(n as usize).min(self.c.len() - 1)]
    }

    /// Right-hand side at step `n >= 1`.
    pub fn bound(&self, n: u64) -> f64 {
        let c = self.c_n(n);
        self.c_star / sqrt(self.eps) * sqrt(c) * exp(-(n as f64) * c * self.delta_minus / 2.0)
    }

    /// `max{C_0, bound(n)}`, evaluated at `|n|`.
    pub fn weight(&self, n: i64) -> f64 {
        let k = n.unsigned_abs();
        if k == 0 {
            self.c0
        } else {
            self.c0.max(self.bound(k))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(tag = "class", rename_all = "snake_case"))]
pub enum PathClassSpec {
    /// Every point in `K`.
    KZ { set: BaseSet },
    /// `x_0` in `K` and `|Delta_n x|^p <= C |Delta t_n|`.
    KInf { set: BaseSet, c: f64, p: f64 },
    /// `x_0` in `K` and `sum_n |Delta_n x|^p / (|Delta t_n| |n|_{++}^alpha) <= C`.
    KAlpha { set: BaseSet, c: f64, p: f64, alpha: f64 },
    /// `dist(x_i, K) <= w(|i|)`.
    KW { set: BaseSet, weight: WeightFn },
    KExp { envelope: ExpEnvelope },
}

impl PathClassSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::KZ { set } => set.validate(),
            Self::KInf { set, c, p } => {
                set.validate()?;
                if !(*c > 0.0) || !(*p > 0.0) {
                    return Err(invalid("K-infinity needs C > 0 and p > 0"));
                }
                Ok(())
            }
            Self::KAlpha { set, c, p, alpha } => {
                set.validate()?;
                if !(*c > 0.0) || !(*p >= 1.0) {
                    return Err(invalid("K-alpha needs C > 0 and p >= 1"));
                }
                if !(*alpha < 1.0 - p) || !alpha.is_finite() {
                    return Err(invalid("K-alpha needs alpha < 1 - p"));
                }
                Ok(())
            }
            Self::KW { set, weight } => {
                set.validate()?;
                weight.validate()
            }
            Self::KExp { envelope } => envelope.validate(),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Self::KZ { .. } => "k_z",
            Self::KInf { .. } => "k_inf",
            Self::KAlpha { .. } => "k_alpha",
            Self::KW { .. } => "k_w",
            Self::KExp { .. } => "k_exp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    /// `x_0` in `K`, or `|x_0| <= C_0` for the envelope class.
    Anchor,
    Point,
    Increment,
    /// Running value of the weighted sum, checked against `C`.
    WeightedSum,
    Distance,
    Envelope,
}

impl Constraint {
    pub fn name(self) -> &'static str {
        match self {
            Self::Anchor => "anchor",
            Self::Point => "point",
            Self::Increment => "increment",
            Self::WeightedSum => "weighted_sum",
            Self::Distance => "distance",
            Self::Envelope => "envelope",
        }
    }
}

/// `slack = rhs - lhs`; the inequality holds iff `slack >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlackEntry {
    pub index: i64,
    pub constraint: Constraint,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MembershipReport {
    pub member: bool,
    pub worst: Option<SlackEntry>,
    pub entries: Vec<SlackEntry>,
}

/// Evaluates the defining inequalities of `spec` over the stored window.
pub fn path_membership(spec: &PathClassSpec, path: &PathWindow) -> Result<MembershipReport> {
    spec.validate()?;
    let set_dim = match spec {
        PathClassSpec::KZ { set }
        | PathClassSpec::KInf { set, .. }
        | PathClassSpec::KAlpha { set, .. }
        | PathClassSpec::KW { set, .. } => Some(set.dim()),
        PathClassSpec::KExp { .. } => None,
    };
    if let Some(d) = set_dim {
        if d != path.dim() {
            return Err(Error::DimensionMismatch { expected: d, got: path.dim() });
        }
    }
    let grid = path.grid();
    let mut entries = Vec::new();
    let mut push = |index, constraint, slack| entries.push(SlackEntry { index, constraint, slack });
    let increment = |n: i64| -> Result<(f64, f64)> {
        let a = path.at(n - 1)?;
        let b = path.at(n)?;
        let d: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
        Ok((norm(&d), grid.t(n)? - grid.t(n - 1)?))
    };
    match spec {
        PathClassSpec::KZ { set } => {
            for n in path.indices() {
                push(n, Constraint::Point, set.signed_margin(path.at(n)?));
            }
        }
        PathClassSpec::KInf { set, c, p } => {
            push(0, Constraint::Anchor, set.signed_margin(path.at(0)?));
            for n in path.offset() + 1..=path.end() {
                let (dx, dt) = increment(n)?;
                push(n, Constraint::Increment, c * dt - pow(dx, *p));
            }
        }
        PathClassSpec::KAlpha { set, c, p, alpha } => {
            push(0, Constraint::Anchor, set.signed_margin(path.at(0)?));
            let mut sum = 0.0;
            for n in path.offset() + 1..=path.end() {
                let (dx, dt) = increment(n)?;
                let weight = pow(n.unsigned_abs().max(1) as f64, *alpha);
                sum += pow(dx, *p) / (dt * weight);
                push(n, Constraint::WeightedSum, c - sum);
            }
        }
        PathClassSpec::KW { set, weight } => {
            for n in path.indices() {
                push(n, Constraint::Distance, weight.eval(n.unsigned_abs()) - set.distance(path.at(n)?));
            }
        }
        PathClassSpec::KExp { envelope } => {
            push(0, Constraint::Anchor, envelope.c0 - norm(path.at(0)?));
            for n in 1..=path.end() {
                push(n, Constraint::Envelope, envelope.bound(n as u64) - norm(path.at(n)?));
            }
        }
    }
    let worst = entries.iter().copied().min_by(|a, b| a.slack.total_cmp(&b.slack));
    let member = entries.iter().all(|e| e.slack >= 0.0);
    Ok(MembershipReport { member, worst, entries })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeFit {
    pub envelope: ExpEnvelope,
    /// Empirical `E|X_n|^2` for `n = 0..=H`.
    pub second_moments: Vec<f64>,
}

/// Fits an exponential envelope to sample paths starting at index 0.
///
/// Each of the `H + 1` constraints gets probability budget `eps / (H + 1)`
/// through Chebyshev's inequality on the empirical second moment, so at
/// most a fraction `eps` of the sample leaves the envelope. `C*` is chosen
/// so that every `C_n` solves `C_n exp(-n C_n delta) = target_n` on the
/// increasing branch `C_n <= 1 / (n delta)`.
pub fn fit_exp_envelope(paths: &[PathWindow], eps: f64) -> Result<EnvelopeFit> {
    if paths.is_empty() {
        return Err(invalid("no paths to fit"));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(invalid("eps must lie in (0, 1]"));
    }
    let horizon = paths[0].end();
    if horizon < 1 || paths.iter().any(|p| p.end() != horizon || p.offset() > 0) {
        return Err(invalid("paths must share an end index >= 1 and contain index 0"));
    }
    let delta = paths.iter().map(|p| p.grid().delta_minus()).fold(f64::INFINITY, f64::min);
    let count = paths.len() as f64;
    let mut moments = Vec::with_capacity(horizon as usize + 1);
    for n in 0..=horizon {
        let mut s = 0.0;
        for p in paths {
            let x = p.at(n)?;
            s += x.iter().map(|v| v * v).sum::<f64>();
        }
        moments.push(s / count);
    }
    let slots = (horizon + 1) as f64;
    let c0 = sqrt(slots * moments[0] / eps);
    let mut peak: f64 = 0.0;
    for n in 1..=horizon {
        peak = peak.max(moments[n as usize] * core::f64::consts::E * n as f64 * delta);
    }
    let c_star = sqrt(slots * peak).max(1.0);
    let mut c = alloc::vec![1.0 / delta];
    for n in 1..=horizon {
        let target = slots * moments[n as usize] / (c_star * c_star);
        c.push(solve_increasing_branch(n as f64 * delta, target));
    }
    let envelope = ExpEnvelope { c0, c_star, c, eps, delta_minus: delta };
    Ok(EnvelopeFit { envelope, second_moments: moments })
}

/// Smallest `c > 0` with `c exp(-k c) >= target`, for `target <= 1 / (e k)`.
fn solve_increasing_branch(k: f64, target: f64) -> f64 {
    let g = |c: f64| c * exp(-k * c);
    if !(target > 0.0) {
        return f64::MIN_POSITIVE;
    }
    let (mut lo, mut hi) = (0.0, 1.0 / k);
    if g(hi) <= target {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}
