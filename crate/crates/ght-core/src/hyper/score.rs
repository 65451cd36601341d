use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use super::model::{ght_eval, Ght};
use crate::causal::{CausalMap, PathWindow};
use crate::error::{invalid, Error, Result};

/// `sup_x max{1, lambda d(ght(x)_{t_n}, ght(x)_{t_{sgn(n) N_T}})}`.
pub fn self_compression(ght: &Ght, paths: &[PathWindow], n_t: usize, lambda: f64, n: i64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(invalid("lambda must be positive"));
    }
    let anchor = n.signum() * n_t as i64;
    let space = ght.decoder().space();
    let mut best: f64 = 1.0;
    for path in paths {
        let d = space.distance(&ght_eval(ght, path, n)?, &ght_eval(ght, path, anchor)?)?;
        best = best.max(lambda * d);
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct NormalizedRow {
    pub n: i64,
    pub raw: f64,
    pub denominator: f64,
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct NormalizedError {
    pub rows: Vec<NormalizedRow>,
    pub raw_sup: f64,
    pub value: f64,
}

/// Indices every path can evaluate for both maps.
pub fn evaluable_window(paths: &[PathWindow], memory: usize) -> Result<(i64, i64)> {
    let lo = paths.iter().map(|p| p.offset() + memory as i64).max().ok_or_else(|| invalid("no paths"))?;
    let hi = paths.iter().map(|p| p.end()).min().ok_or_else(|| invalid("no paths"))?;
    if lo > hi {
        return Err(Error::OutOfWindow { index: lo, lo, hi });
    }
    Ok((lo, hi))
}

/// `sup_{n, x} d(F(x)_{t_n}, ght(x)_{t_n}) / max{c_AC(n), c_table(n), self_compression(n)}`
/// with `lambda = 8 / eps` unless given.
#[allow(clippy::too_many_arguments)]
pub fn normalized_error(
    target: &dyn CausalMap,
    ght: &Ght,
    paths: &[PathWindow],
    c_ac: &dyn Fn(i64) -> Result<f64>,
    c_table: &dyn Fn(i64) -> Result<f64>,
    n_t: usize,
    eps: f64,
    lambda: Option<f64>,
) -> Result<NormalizedError> {
    if !(eps > 0.0) {
        return Err(invalid("eps must be positive"));
    }
    let lambda = lambda.unwrap_or(8.0 / eps);
    let (lo, hi) = evaluable_window(paths, target.memory().max(ght.memory()))?;
    let space = ght.decoder().space();
    let mut rows = Vec::with_capacity((hi - lo + 1) as usize);
    for n in lo..=hi {
        let mut raw: f64 = 0.0;
        for path in paths {
            raw = raw.max(space.distance(&target.eval(path, n)?, &ght_eval(ght, path, n)?)?);
        }
        let a = c_ac(n)?;
        let b = c_table(n)?;
        if !(a >= 1.0) || !(b >= 1.0) {
            return Err(Error::Domain(alloc::format!("compression rates at n = {n} fall below 1: {a}, {b}")));
        }
        let denominator = a.max(b).max(self_compression(ght, paths, n_t, lambda, n)?);
        rows.push(NormalizedRow { n, raw, denominator, normalized: raw / denominator });
    }
    let raw_sup = rows.iter().map(|r| r.raw).fold(0.0, f64::max);
    let value = rows.iter().map(|r| r.normalized).fold(0.0, f64::max);
    Ok(NormalizedError { rows, raw_sup, value })
}
