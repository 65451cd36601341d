use std::path::Path;

use ght_core::causal::{grid_validate, PathWindow};
use ght_core::hyper::Ght;
use ght_core::metric::{DiscreteMeasure, GaussianMeasure, PathMeasure};
use ght_core::nalgebra::DMatrix;
use ght_core::nn::{ActivationKind, MultiIndex, Network};
use ght_core::qas::{QasSpace, QuantizationCode};
use ght_core::transformer::GeometricTransformer;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureDto {
    pub dim: usize,
    pub atoms: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl MeasureDto {
    pub fn build(&self) -> Result<DiscreteMeasure> {
        if let Some(a) = self.atoms.iter().find(|a| a.len() != self.dim) {
            return Err(HarnessError::config(format!("key `atoms`: atom of length {} in dimension {}", a.len(), self.dim)));
        }
        Ok(DiscreteMeasure::from_points(&self.atoms, self.weights.clone())?)
    }

    pub fn from_measure(m: &DiscreteMeasure) -> Self {
        Self {
            dim: m.dim(),
            atoms: m.iter().map(|(a, _)| a.to_vec()).collect(),
            weights: m.iter().map(|(_, w)| w).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianDto {
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

impl GaussianDto {
    pub fn build(&self) -> Result<GaussianMeasure> {
        let d = self.mean.len();
        if self.cov.len() != d || self.cov.iter().any(|r| r.len() != d) {
            return Err(HarnessError::config(format!("key `cov`: expected a {d} x {d} matrix")));
        }
        let cov = DMatrix::from_fn(d, d, |i, j| self.cov[i][j]);
        Ok(GaussianMeasure::new(self.mean.clone(), cov)?)
    }
}

/// A measure given inline or through a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    Discrete { dim: usize, atoms: Vec<Vec<f64>>, weights: Vec<f64> },
    /// Law of paths of `horizon` steps in `R^step_dim`, each path flattened.
    Paths { step_dim: usize, horizon: usize, paths: Vec<Vec<f64>>, weights: Vec<f64> },
    Gaussian { mean: Vec<f64>, cov: Vec<Vec<f64>> },
    File { path: String },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Resolved {
    Discrete(DiscreteMeasure),
    Paths(PathMeasure),
    Gaussian(GaussianMeasure),
}

impl MeasureSpec {
    pub fn resolve(&self, base: &Path) -> Result<Resolved> {
        match self {
            Self::Discrete { dim, atoms, weights } => {
                Ok(Resolved::Discrete(MeasureDto { dim: *dim, atoms: atoms.clone(), weights: weights.clone() }.build()?))
            }
            Self::Paths { step_dim, horizon, paths, weights } => {
                Ok(Resolved::Paths(PathMeasure::from_paths(*step_dim, *horizon, paths, weights.clone())?))
            }
            Self::Gaussian { mean, cov } => Ok(Resolved::Gaussian(GaussianDto { mean: mean.clone(), cov: cov.clone() }.build()?)),
            Self::File { path } => {
                let full = base.join(path);
                let text = std::fs::read_to_string(&full)
                    .map_err(|e| HarnessError::config(format!("cannot read measure file {}: {e}", full.display())))?;
                let inner: MeasureSpec = serde_json::from_str(&text)
                    .map_err(|e| HarnessError::config(format!("measure file {}: {e}", full.display())))?;
                if matches!(inner, Self::File { .. }) {
                    return Err(HarnessError::config(format!("measure file {} points at another file", full.display())));
                }
                inner.resolve(base)
            }
        }
    }
}

/// `{"times", "values", "offset"}`: `values[i]` sits at index `offset + i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathDto {
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub offset: i64,
}

impl PathDto {
    pub fn build(&self) -> Result<PathWindow> {
        let grid = grid_validate(&self.times)?;
        if grid.start() != self.offset {
            return Err(HarnessError::config(format!(
                "key `offset`: {} does not match the position of t = 0 (index {})",
                self.offset,
                grid.start()
            )));
        }
        Ok(PathWindow::new(grid, &self.values)?)
    }

    pub fn from_path(p: &PathWindow) -> Self {
        Self { times: p.grid().times().to_vec(), values: p.values(), offset: p.offset() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GtBundle {
    pub space: QasSpace,
    pub encoder: Network,
    pub codes: Vec<QuantizationCode>,
}

impl GtBundle {
    pub fn from_model(gt: &GeometricTransformer) -> Self {
        Self { space: gt.space().clone(), encoder: gt.encoder().clone(), codes: gt.codes().to_vec() }
    }

    pub fn build(&self) -> Result<GeometricTransformer> {
        Ok(GeometricTransformer::new(self.space.clone(), self.encoder.clone(), self.codes.clone())?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GhtBundle {
    pub decoder: GtBundle,
    pub hyper: Network,
    pub theta_init: Vec<f64>,
    pub horizon: usize,
    pub encoder_dims: MultiIndex,
    pub encoder_activation: ActivationKind,
    pub memory: usize,
}

impl GhtBundle {
    pub fn from_model(g: &Ght) -> Self {
        Self {
            decoder: GtBundle::from_model(g.decoder()),
            hyper: g.hyper().clone(),
            theta_init: g.theta_init().to_vec(),
            horizon: g.horizon(),
            encoder_dims: g.encoder_dims().clone(),
            encoder_activation: g.encoder_activation(),
            memory: g.memory(),
        }
    }

    pub fn build(&self) -> Result<Ght> {
        Ok(Ght::new(
            self.decoder.build()?,
            self.hyper.clone(),
            self.theta_init.clone(),
            self.horizon,
            self.encoder_dims.clone(),
            self.encoder_activation,
            self.memory,
        )?)
    }
}
