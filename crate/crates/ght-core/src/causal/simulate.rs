use alloc::vec::Vec;

use libm::sqrt;
#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use super::grid::{PathWindow, TimeGrid};
use crate::error::{invalid, Error, Result};
use crate::rng::{normal, stream};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(tag = "kind", rename_all = "snake_case"))]
pub enum InitialCondition {
    Fixed { x: Vec<f64> },
    /// Independent `N(mean_i, std^2)` coordinates.
    Gaussian { mean: Vec<f64>, std: f64 },
}

impl InitialCondition {
    pub fn dim(&self) -> usize {
        match self {
            Self::Fixed { x } => x.len(),
            Self::Gaussian { mean, .. } => mean.len(),
        }
    }
}

/// Coefficients of `dX = alpha(t, X) dt + beta(t, X) dW`, with `beta`
/// returned row-major as a `d x r` matrix.
pub struct SdeCoefficients<'a> {
    pub alpha: &'a (dyn Fn(f64, &[f64]) -> Vec<f64> + Sync),
    pub beta: &'a (dyn Fn(f64, &[f64]) -> Vec<f64> + Sync),
    pub noise_dim: usize,
}

/// Euler-Maruyama path number `index` on `t_0..t_H`, driven by the stream
/// `(seed, index)`: initial draws first, then `r` normals per step.
pub fn euler_path(
    sde: &SdeCoefficients<'_>,
    x0: &InitialCondition,
    grid: &TimeGrid,
    horizon: usize,
    seed: u64,
    index: u64,
) -> Result<PathWindow> {
    let d = x0.dim();
    let r = sde.noise_dim;
    if d == 0 || r == 0 {
        return Err(invalid("state and noise dimensions must be positive"));
    }
    let window = grid.restrict(0, horizon as i64)?;
    let mut rng = stream(seed, index);
    let mut x: Vec<f64> = match x0 {
        InitialCondition::Fixed { x } => x.clone(),
        InitialCondition::Gaussian { mean, std } => mean.iter().map(|m| m + std * normal(&mut rng)).collect(),
    };
    let mut values = Vec::with_capacity(horizon + 1);
    values.push(x.clone());
    let mut dw = alloc::vec![0.0; r];
    for n in 0..horizon as i64 {
        let t = window.t(n)?;
        let dt = window.dt(n)?;
        let a = (sde.alpha)(t, &x);
        let b = (sde.beta)(t, &x);
        if a.len() != d || b.len() != d * r {
            return Err(Error::DimensionMismatch { expected: d + d * r, got: a.len() + b.len() });
        }
        let root = sqrt(dt);
        dw.iter_mut().for_each(|w| *w = root * normal(&mut rng));
        for i in 0..d {
            let noise: f64 = (0..r).map(|j| b[i * r + j] * dw[j]).sum();
            x[i] += a[i] * dt + noise;
        }
        values.push(x.clone());
    }
    PathWindow::new(window, &values)
}

pub fn euler_simulate(
    sde: &SdeCoefficients<'_>,
    x0: &InitialCondition,
    grid: &TimeGrid,
    horizon: usize,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<PathWindow>> {
    (0..n_paths as u64).map(|i| euler_path(sde, x0, grid, horizon, seed, i)).collect()
}
