use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Basis of a separable Banach space, with the norm used on coefficient
/// differences.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(tag = "basis", rename_all = "snake_case"))]
pub enum SchauderBasis {
    /// Faber-Schauder hats on `[0, 1]`, sup norm over `grid + 1` equispaced
    /// points.
    FaberSchauder { grid: usize },
    /// Unit vectors of `l^2`.
    Canonical,
}

/// Value at `t` of the `s`-th Faber-Schauder function: `1`, `t`, then the
/// dyadic hats of height one.
pub fn faber_schauder(s: usize, t: f64) -> f64 {
    match s {
        0 => 1.0,
        1 => t,
        _ => {
            let m = s - 1;
            let j = usize::BITS - 1 - m.leading_zeros();
            let k = m - (1usize << j);
            let scale = (1u64 << j) as f64;
            let left = k as f64 / scale;
            let right = (k + 1) as f64 / scale;
            let mid = 0.5 * (left + right);
            if t <= left || t >= right {
                0.0
            } else if t <= mid {
                (t - left) / (mid - left)
            } else {
                (right - t) / (right - mid)
            }
        }
    }
}

/// `K(t, s) = (m+1)^{-a} ((m+1)^a - m - 1) / (a - 1)` with `m = min(t, s)`.
pub fn forward_rate_kernel(alpha: f64, t: f64, s: f64) -> f64 {
    let m = t.min(s);
    (1.0 - libm::pow(1.0 + m, 1.0 - alpha)) / (alpha - 1.0)
}

/// Knots `0.1 * 2^n` up to `horizon`.
pub fn geometric_knots(horizon: f64) -> Vec<f64> {
    let mut knots = Vec::new();
    let mut t = 0.1;
    while t <= horizon {
        knots.push(t);
        t *= 2.0;
    }
    knots
}

/// Path functionals used as sufficient statistics of an exponential family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "snake_case"))]
pub enum PathStatistic {
    Mean,
    SecondMoment,
    QuadraticVariation,
    Terminal,
    Maximum,
}

impl PathStatistic {
    pub fn eval(self, path: &[f64]) -> f64 {
        let n = path.len().max(1) as f64;
        match self {
            Self::Mean => path.iter().sum::<f64>() / n,
            Self::SecondMoment => path.iter().map(|x| x * x).sum::<f64>() / n,
            Self::QuadraticVariation => path.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0])).sum(),
            Self::Terminal => path.last().copied().unwrap_or(0.0),
            Self::Maximum => path.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_closed_form_matches_integral_form() {
        let a = 4.5;
        for &(t, s) in &[(0.3, 2.0), (5.0, 1.0), (0.0, 3.0)] {
            let m: f64 = if t < s { t } else { s };
            let direct = libm::pow(m + 1.0, -a) * (libm::pow(m + 1.0, a) - m - 1.0) / (a - 1.0);
            assert!((forward_rate_kernel(a, t, s) - direct).abs() < 1e-15);
        }
        assert_eq!(forward_rate_kernel(a, 0.0, 1.0), 0.0);
    }

    #[test]
    fn hats() {
        assert_eq!(faber_schauder(2, 0.5), 1.0);
        assert_eq!(faber_schauder(3, 0.25), 1.0);
        assert_eq!(faber_schauder(4, 0.75), 1.0);
        assert_eq!(faber_schauder(5, 0.125), 1.0);
        assert_eq!(faber_schauder(3, 0.75), 0.0);
    }

    #[test]
    fn knots_cap_at_horizon() {
        let k = geometric_knots(1.0);
        assert_eq!(k.len(), 4);
        assert!(k[3] <= 1.0);
    }
}
