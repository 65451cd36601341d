use libm::pow;
#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use super::classes::{ExpEnvelope, WeightFn};
use super::grid::PathWindow;
use super::maps::CausalMap;
use crate::error::{invalid, Error, Result};
use crate::metric::convergent_power_sum;
use crate::qas::QasSpace;

/// Hoelder moduli `omega_rho(u) = L_rho u^alpha`, `omega_f(u) = L_f u^alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(deny_unknown_fields))]
pub struct Holder {
    pub l_rho: f64,
    pub l_f: f64,
    pub alpha: f64,
}

impl Holder {
    fn validate(&self) -> Result<()> {
        if !(self.l_rho >= 0.0) || !(self.l_f >= 0.0) || !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(invalid("Hoelder data needs L >= 0 and alpha in (0, 1]"));
        }
        Ok(())
    }

    /// `omega_rho(omega_f(u)) = L_rho L_f^alpha u^{alpha^2}`.
    pub fn compose(&self, u: f64) -> f64 {
        self.l_rho * pow(self.l_f, self.alpha) * pow(u, self.alpha * self.alpha)
    }
}

/// Shared inputs of every row.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(deny_unknown_fields))]
pub struct RateParams {
    pub eps: f64,
    /// State dimension `d`.
    pub dim: usize,
    /// Memory `m(eps / 4)`.
    pub memory: usize,
    pub delta_plus: f64,
    pub n_t: u64,
    pub holder: Holder,
}

/// One path-space row of the compression-rate table.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(tag = "row", rename_all = "snake_case"))]
pub enum RateRow {
    KW { diam: f64, weight: WeightFn },
    KExp { diam: f64, envelope: ExpEnvelope },
    KInf { c: f64, p: f64 },
    KAlpha { c: f64, p: f64, alpha: f64 },
    KZ { diam: f64 },
    /// Time-homogeneous map on `K^Z`: the span term drops out.
    KZHomogeneous { diam: f64 },
}

impl RateRow {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::KW { .. } => "k_w",
            Self::KExp { .. } => "k_exp",
            Self::KInf { .. } => "k_inf",
            Self::KAlpha { .. } => "k_alpha",
            Self::KZ { .. } => "k_z",
            Self::KZHomogeneous { .. } => "k_z_homogeneous",
        }
    }
}

/// `c_eps(n)`: 1 inside `|n| <= N_T`, otherwise the selected row, raw.
pub fn compression_rate(row: &RateRow, params: &RateParams, n: i64) -> Result<f64> {
    params.holder.validate()?;
    if !(params.eps > 0.0) || !(params.delta_plus > 0.0) {
        return Err(invalid("rates need eps > 0 and delta_plus > 0"));
    }
    let k = n.unsigned_abs();
    if k <= params.n_t {
        return Ok(1.0);
    }
    let lead = 4.0 / params.eps;
    let span = (k - params.n_t) as f64 * params.delta_plus;
    let dm = (params.dim * params.memory) as f64;
    let h = &params.holder;
    let value = match row {
        RateRow::KW { diam, weight } => {
            weight.validate()?;
            lead * h.compose(span + dm * (diam + weight.eval(k) + weight.eval(params.n_t)))
        }
        RateRow::KExp { diam, envelope } => {
            envelope.validate()?;
            let w = |i: u64| envelope.weight(i as i64);
            lead * h.compose(span + dm * (diam + w(k) + w(params.n_t)))
        }
        RateRow::KInf { c, p } => {
            if !(*c > 0.0 && *p > 0.0) {
                return Err(invalid("K-infinity row needs C > 0 and p > 0"));
            }
            let inner = 1.0 + (dm + 1.0) * pow(*c, 1.0 / p) * pow(params.delta_plus, (1.0 - p) / p);
            lead * h.compose(span * inner)
        }
        RateRow::KAlpha { c, p, alpha } => {
            if !(*c > 0.0) || !(*p > 1.0) {
                return Err(invalid("K-alpha row needs C > 0 and p > 1"));
            }
            let s = alpha / (p - 1.0);
            if !(s < -1.0) {
                return Err(Error::Domain(alloc::format!("alpha / (p - 1) = {s} >= -1: the series diverges")));
            }
            let zeta = convergent_power_sum(s)?.value;
            let tail = (dm + 1.0)
                * pow(*c, 1.0 / p)
                * pow(params.delta_plus, 1.0 / p)
                * pow(1.0 + 2.0 * zeta, (p - 1.0) / p);
            lead * h.compose(span + tail)
        }
        RateRow::KZ { diam } => lead * h.compose(span + (dm + 1.0) * diam),
        RateRow::KZHomogeneous { diam } => lead * h.compose((dm + 1.0) * diam),
    };
    Ok(value)
}

/// Data-driven row for an arbitrary compact: over the sample paths and the
/// evaluable `k <= |n|`, `4/eps max{1, d(F(x)_{t_k}, F(x)_{t_n})}`.
pub fn worst_case_rate(
    map: &dyn CausalMap,
    space: &QasSpace,
    paths: &[PathWindow],
    eps: f64,
    n_t: u64,
    n: i64,
) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(invalid("eps must be positive"));
    }
    if n.unsigned_abs() <= n_t {
        return Ok(1.0);
    }
    let mut best: f64 = 1.0;
    for path in paths {
        let here = map.eval(path, n)?;
        let lo = path.offset() + map.memory() as i64;
        let hi = (n.unsigned_abs() as i64).min(path.end());
        for k in lo..=hi {
            best = best.max(space.distance(&map.eval(path, k)?, &here)?);
        }
    }
    Ok(4.0 / eps * best)
}
