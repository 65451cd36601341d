use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSum {
    pub value: f64,
    /// Certified bound on `|value - sum|`, excluding floating-point rounding.
    pub error_bound: f64,
    pub terms: u64,
}

/// `sum_{k >= 1} k^s` for `s < -1`.
///
/// The first `K` terms are summed exactly (smallest first) and the tail is
/// bracketed for the convex summand `x^s`:
/// `int_K^inf x^s dx - K^s / 2 <= tail <= int_{K+1/2}^inf x^s dx`.
/// `K` is doubled until half the bracket is below `1e-10`.
pub fn convergent_power_sum(s: f64) -> Result<PowerSum> {
    if !(s < -1.0) || !s.is_finite() {
        return Err(Error::Domain("power sum needs a finite exponent s < -1".into()));
    }
    let e = -s - 1.0;
    let lower = |k: f64| libm::pow(k, -e) / e - libm::pow(k, s) / 2.0;
    let upper = |k: f64| libm::pow(k + 0.5, -e) / e;
    let mut k: u64 = 16;
    while (upper(k as f64) - lower(k as f64)) / 2.0 > 1e-10 {
        if k >= 1 << 40 {
            return Err(Error::Numeric("power sum tail bound did not tighten".into()));
        }
        k *= 2;
    }
    let mut partial = 0.0;
    for j in (1..=k).rev() {
        partial += libm::pow(j as f64, s);
    }
    let (lo, hi) = (lower(k as f64), upper(k as f64));
    Ok(PowerSum { value: partial + (lo + hi) / 2.0, error_bound: (hi - lo) / 2.0, terms: k })
}
