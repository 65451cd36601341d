use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Layer widths `(d_0, ..., d_{J+1})` of a feedforward network of depth `J`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(try_from = "Vec<usize>", into = "Vec<usize>"))]
pub struct MultiIndex(Vec<usize>);

impl TryFrom<Vec<usize>> for MultiIndex {
    type Error = Error;

    fn try_from(dims: Vec<usize>) -> Result<Self> {
        Self::new(dims)
    }
}

impl From<MultiIndex> for Vec<usize> {
    fn from(md: MultiIndex) -> Self {
        md.0
    }
}

/// Offsets of one hidden layer `(A, b, alpha)` inside a flat parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HiddenOffsets {
    pub rows: usize,
    pub cols: usize,
    pub a: usize,
    pub b: usize,
    pub alpha: usize,
}

/// Offsets of the final affine readout `(A, c)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReadoutOffsets {
    pub rows: usize,
    pub cols: usize,
    pub a: usize,
    pub c: usize,
}

impl MultiIndex {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.len() < 2 {
            return Err(invalid("a multi-index needs at least input and output widths"));
        }
        if dims.contains(&0) {
            return Err(invalid("layer widths must be positive"));
        }
        Ok(Self(dims))
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    /// Number of hidden (activated) layers `J`.
    pub fn depth(&self) -> usize {
        self.0.len() - 2
    }

    pub fn input(&self) -> usize {
        self.0[0]
    }

    pub fn output(&self) -> usize {
        self.0[self.0.len() - 1]
    }

    pub fn param_count(&self) -> usize {
        param_count(self)
    }

    pub fn hidden_offsets(&self) -> Vec<HiddenOffsets> {
        let mut off = 0;
        let mut out = Vec::with_capacity(self.depth());
        for j in 0..self.depth() {
            let (cols, rows) = (self.0[j], self.0[j + 1]);
            let a = off;
            let b = a + rows * cols;
            let alpha = b + rows;
            off = alpha + 2 * rows;
            out.push(HiddenOffsets { rows, cols, a, b, alpha });
        }
        out
    }

    pub fn readout_offsets(&self) -> ReadoutOffsets {
        let j = self.depth();
        let (cols, rows) = (self.0[j], self.0[j + 1]);
        let a = self.param_count() - rows * (cols + 1);
        ReadoutOffsets { rows, cols, a, c: a + rows * cols }
    }
}

/// `P([d]) = sum_{j=0}^{J} d_{j+1}(d_j + 3) - 2 d_{J+1}`.
pub fn param_count(md: &MultiIndex) -> usize {
    let d = md.dims();
    let total: usize = d.windows(2).map(|w| w[1] * (w[0] + 3)).sum();
    total - 2 * md.output()
}

/// One hidden layer: `A` row-major `rows x cols`, bias `b`, and per-neuron
/// activation parameters `alpha` stored as `(alpha_1, alpha_2)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenLayer {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub alpha: Vec<[f64; 2]>,
}

/// The structured view of a flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposed {
    pub hidden: Vec<HiddenLayer>,
    pub a: Vec<f64>,
    pub c: Vec<f64>,
}

/// Splits `theta` into its layers.
pub fn decode(md: &MultiIndex, theta: &[f64]) -> Result<Decomposed> {
    let p = md.param_count();
    if theta.len() != p {
        return Err(Error::DimensionMismatch { expected: p, got: theta.len() });
    }
    let hidden = md
        .hidden_offsets()
        .into_iter()
        .map(|o| HiddenLayer {
            a: theta[o.a..o.b].to_vec(),
            b: theta[o.b..o.alpha].to_vec(),
            alpha: theta[o.alpha..o.alpha + 2 * o.rows].chunks_exact(2).map(|c| [c[0], c[1]]).collect(),
        })
        .collect();
    let r = md.readout_offsets();
    Ok(Decomposed { hidden, a: theta[r.a..r.c].to_vec(), c: theta[r.c..].to_vec() })
}

/// Inverse of [`decode`].
pub fn encode(md: &MultiIndex, parts: &Decomposed) -> Result<Vec<f64>> {
    if parts.hidden.len() != md.depth() {
        return Err(Error::DimensionMismatch { expected: md.depth(), got: parts.hidden.len() });
    }
    let mut theta = Vec::with_capacity(md.param_count());
    for (layer, o) in parts.hidden.iter().zip(md.hidden_offsets()) {
        check_len(layer.a.len(), o.rows * o.cols)?;
        check_len(layer.b.len(), o.rows)?;
        check_len(layer.alpha.len(), o.rows)?;
        theta.extend_from_slice(&layer.a);
        theta.extend_from_slice(&layer.b);
        theta.extend(layer.alpha.iter().flatten());
    }
    let r = md.readout_offsets();
    check_len(parts.a.len(), r.rows * r.cols)?;
    check_len(parts.c.len(), r.rows)?;
    theta.extend_from_slice(&parts.a);
    theta.extend_from_slice(&parts.c);
    Ok(theta)
}

fn check_len(got: usize, expected: usize) -> Result<()> {
    if got == expected {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
