use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{ensure_finite, invalid, Error, Result};

/// Tolerance on the total mass of a probability vector.
pub const WEIGHT_TOL: f64 = 1e-9;

pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

/// Finitely supported probability measure on `R^dim`.
///
/// Atoms are stored flat, sorted lexicographically, with exact duplicates
/// merged and zero-weight atoms dropped. Two measures built from the same
/// weighted atoms are therefore bitwise equal.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    atoms: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(dim: usize, atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("measure dimension must be positive"));
        }
        if atoms.len() != dim * weights.len() {
            return Err(Error::DimensionMismatch { expected: dim * weights.len(), got: atoms.len() });
        }
        ensure_finite(&atoms, "measure atoms")?;
        ensure_finite(&weights, "measure weights")?;
        if weights.iter().any(|&w| w < 0.0) {
            return Err(invalid("negative weight"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(invalid("weights do not sum to one"));
        }
        Ok(Self::canonical(dim, atoms, weights))
    }

    pub fn from_points(points: &[Vec<f64>], weights: Vec<f64>) -> Result<Self> {
        let dim = points.first().map(|p| p.len()).ok_or_else(|| invalid("no atoms"))?;
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
        }
        Self::new(dim, points.concat(), weights)
    }

    pub fn dirac(point: &[f64]) -> Result<Self> {
        Self::new(point.len(), point.to_vec(), alloc::vec![1.0])
    }

    /// Uniform measure on `atoms.len() / dim` (possibly repeated) points.
    pub fn uniform(dim: usize, atoms: Vec<f64>) -> Result<Self> {
        if dim == 0 || atoms.is_empty() || atoms.len() % dim != 0 {
            return Err(invalid("uniform measure needs a non-empty multiple of dim coordinates"));
        }
        let k = atoms.len() / dim;
        Self::new(dim, atoms, alloc::vec![1.0 / k as f64; k])
    }

    /// Convex combination `sum_n w_n mu_n`. Zero weights contribute nothing.
    pub fn mixture(weights: &[f64], measures: &[&DiscreteMeasure]) -> Result<Self> {
        if weights.len() != measures.len() || measures.is_empty() {
            return Err(Error::DimensionMismatch { expected: measures.len(), got: weights.len() });
        }
        let dim = measures[0].dim;
        let mut atoms = Vec::new();
        let mut ws = Vec::new();
        for (&w, m) in weights.iter().zip(measures) {
            if m.dim != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: m.dim });
            }
            if w == 0.0 {
                continue;
            }
            atoms.extend_from_slice(&m.atoms);
            ws.extend(m.weights.iter().map(|&v| w * v));
        }
        Self::new(dim, atoms, ws)
    }

    fn canonical(dim: usize, atoms: Vec<f64>, weights: Vec<f64>) -> Self {
        let k = weights.len();
        // -0.0 and 0.0 are the same coordinate.
        let atoms: Vec<f64> = atoms.into_iter().map(|x| x + 0.0).collect();
        let mut order: Vec<usize> = (0..k).filter(|&i| weights[i] > 0.0).collect();
        order.sort_by(|&a, &b| {
            lex_cmp(&atoms[a * dim..(a + 1) * dim], &atoms[b * dim..(b + 1) * dim]).then(a.cmp(&b))
        });
        let mut out_atoms: Vec<f64> = Vec::with_capacity(order.len() * dim);
        let mut out_weights: Vec<f64> = Vec::with_capacity(order.len());
        for i in order {
            let x = &atoms[i * dim..(i + 1) * dim];
            let n = out_weights.len();
            if n > 0 && out_atoms[(n - 1) * dim..] == *x {
                out_weights[n - 1] += weights[i];
            } else {
                out_atoms.extend_from_slice(x);
                out_weights.push(weights[i]);
            }
        }
        Self { dim, atoms: out_atoms, weights: out_weights }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn atom(&self, i: usize) -> &[f64] {
        &self.atoms[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn atoms_flat(&self) -> &[f64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.atoms.chunks(self.dim).zip(self.weights.iter().copied())
    }

    /// Largest Euclidean distance between two atoms.
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                d = d.max(euclidean(self.atom(i), self.atom(j)));
            }
        }
        d
    }

    /// Smallest distance between two distinct atoms (`inf` for a Dirac).
    pub fn min_separation(&self) -> f64 {
        let mut d = f64::INFINITY;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                d = d.min(euclidean(self.atom(i), self.atom(j)));
            }
        }
        d
    }

    /// Pushforward under a translation.
    pub fn translate(&self, shift: &[f64]) -> Result<Self> {
        if shift.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: shift.len() });
        }
        let atoms = self
            .atoms
            .chunks(self.dim)
            .flat_map(|a| a.iter().zip(shift).map(|(x, s)| x + s))
            .collect();
        Self::new(self.dim, atoms, self.weights.clone())
    }
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// `l1` distance between the weight vectors over the union of supports; lies
/// in `[0, 2]`.
pub fn total_variation(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Result<f64> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch { expected: a.dim, got: b.dim });
    }
    let (mut i, mut j) = (0, 0);
    let mut tv = 0.0;
    while i < a.len() || j < b.len() {
        let ord = if i == a.len() {
            Ordering::Greater
        } else if j == b.len() {
            Ordering::Less
        } else {
            lex_cmp(a.atom(i), b.atom(j))
        };
        match ord {
            Ordering::Less => {
                tv += a.weight(i);
                i += 1;
            }
            Ordering::Greater => {
                tv += b.weight(j);
                j += 1;
            }
            Ordering::Equal => {
                tv += (a.weight(i) - b.weight(j)).abs();
                i += 1;
                j += 1;
            }
        }
    }
    Ok(tv)
}

/// Discrete law of paths `(x_1, ..., x_T)` with `x_t` in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathMeasure {
    step_dim: usize,
    horizon: usize,
    law: DiscreteMeasure,
}

impl PathMeasure {
    pub fn new(step_dim: usize, horizon: usize, law: DiscreteMeasure) -> Result<Self> {
        if step_dim == 0 || horizon == 0 {
            return Err(invalid("path measures need positive step dimension and horizon"));
        }
        if law.dim() != step_dim * horizon {
            return Err(Error::DimensionMismatch { expected: step_dim * horizon, got: law.dim() });
        }
        Ok(Self { step_dim, horizon, law })
    }

    pub fn from_paths(step_dim: usize, horizon: usize, paths: &[Vec<f64>], weights: Vec<f64>) -> Result<Self> {
        Self::new(step_dim, horizon, DiscreteMeasure::from_points(paths, weights)?)
    }

    pub fn step_dim(&self) -> usize {
        self.step_dim
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn law(&self) -> &DiscreteMeasure {
        &self.law
    }

    pub fn into_law(self) -> DiscreteMeasure {
        self.law
    }
}
