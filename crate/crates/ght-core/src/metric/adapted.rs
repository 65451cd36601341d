//! Adapted (bicausal) Wasserstein distance by backward induction on the
//! conditional trees of two path measures.

use alloc::vec;
use alloc::vec::Vec;

use super::measure::{DiscreteMeasure, PathMeasure};
use super::transport::solve_transport;
use super::wasserstein::{check_exponent, ground_cost, root};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    /// State `x_t` reached at this node (empty at the root).
    pub value: Vec<f64>,
    /// Marginal probability of the prefix ending here.
    pub weight: f64,
    /// Indices into the next level.
    pub children: Vec<usize>,
}

/// Prefix tree of a path measure; level `t` holds the distinct prefixes of
/// length `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathTree {
    step_dim: usize,
    levels: Vec<Vec<TreeNode>>,
}

impl PathTree {
    pub fn build(mu: &PathMeasure) -> Self {
        let d = mu.step_dim();
        let horizon = mu.horizon();
        let law = mu.law();
        let mut levels: Vec<Vec<TreeNode>> = vec![Vec::new(); horizon + 1];
        levels[0].push(TreeNode { value: Vec::new(), weight: law.weights().iter().sum(), children: Vec::new() });
        // Atoms are sorted lexicographically, so equal prefixes are contiguous.
        let mut ranges: Vec<(usize, usize, usize)> = vec![(0, law.len(), 0)];
        for t in 0..horizon {
            let mut next = Vec::new();
            for &(lo, hi, node) in &ranges {
                let mut s = lo;
                while s < hi {
                    let block = &law.atom(s)[t * d..(t + 1) * d];
                    let mut e = s + 1;
                    while e < hi && law.atom(e)[t * d..(t + 1) * d] == *block {
                        e += 1;
                    }
                    let weight = (s..e).map(|k| law.weight(k)).sum();
                    let idx = levels[t + 1].len();
                    levels[t + 1].push(TreeNode { value: block.to_vec(), weight, children: Vec::new() });
                    levels[t][node].children.push(idx);
                    next.push((s, e, idx));
                    s = e;
                }
            }
            ranges = next;
        }
        Self { step_dim: d, levels }
    }

    pub fn horizon(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, t: usize) -> &[TreeNode] {
        &self.levels[t]
    }

    /// Conditional law of `x_{t+1}` given the prefix at `node` of level `t`.
    pub fn conditional(&self, t: usize, node: usize) -> (Vec<&[f64]>, Vec<f64>) {
        let parent = &self.levels[t][node];
        let kids = &parent.children;
        let values = kids.iter().map(|&c| self.levels[t + 1][c].value.as_slice()).collect();
        let weights = kids.iter().map(|&c| self.levels[t + 1][c].weight / parent.weight).collect();
        (values, weights)
    }

    /// Marginalises the tree back into a path measure.
    pub fn to_measure(&self) -> Result<PathMeasure> {
        let horizon = self.horizon();
        let mut paths: Vec<(Vec<f64>, f64)> = vec![(Vec::new(), self.levels[0][0].weight)];
        let mut nodes = vec![0usize];
        for t in 0..horizon {
            let mut next_paths = Vec::new();
            let mut next_nodes = Vec::new();
            for (k, &node) in nodes.iter().enumerate() {
                for &c in &self.levels[t][node].children {
                    let mut p = paths[k].0.clone();
                    p.extend_from_slice(&self.levels[t + 1][c].value);
                    next_paths.push((p, self.levels[t + 1][c].weight));
                    next_nodes.push(c);
                }
            }
            paths = next_paths;
            nodes = next_nodes;
        }
        let (atoms, weights): (Vec<Vec<f64>>, Vec<f64>) = paths.into_iter().unzip();
        PathMeasure::new(self.step_dim, horizon, DiscreteMeasure::new(self.step_dim * horizon, atoms.concat(), weights)?)
    }
}

/// `AW_p` for the cost `sum_t ||x_t - y_t||^p`.
///
/// The value function on pairs of prefixes is computed level by level from
/// the horizon down; each step solves a transport problem between the two
/// conditional laws with the continuation value added to the ground cost.
pub fn adapted_wasserstein_p(mu: &PathMeasure, nu: &PathMeasure, p: f64) -> Result<f64> {
    check_exponent(p)?;
    if mu.step_dim() != nu.step_dim() {
        return Err(Error::DimensionMismatch { expected: mu.step_dim(), got: nu.step_dim() });
    }
    if mu.horizon() != nu.horizon() {
        return Err(Error::DimensionMismatch { expected: mu.horizon(), got: nu.horizon() });
    }
    let a = PathTree::build(mu);
    let b = PathTree::build(nu);
    let horizon = a.horizon();
    let mut value_next: Vec<f64> = vec![0.0; a.level(horizon).len() * b.level(horizon).len()];
    for t in (0..horizon).rev() {
        let (na, nb) = (a.level(t).len(), b.level(t).len());
        let nb_next = b.level(t + 1).len();
        let mut value = vec![0.0; na * nb];
        for i in 0..na {
            let (xs, wx) = a.conditional(t, i);
            let ci = &a.level(t)[i].children;
            for j in 0..nb {
                let (ys, wy) = b.conditional(t, j);
                let cj = &b.level(t)[j].children;
                let mut cost = Vec::with_capacity(xs.len() * ys.len());
                for (k, x) in xs.iter().enumerate() {
                    for (l, y) in ys.iter().enumerate() {
                        cost.push(ground_cost(x, y, p) + value_next[ci[k] * nb_next + cj[l]]);
                    }
                }
                value[i * nb + j] = solve_transport(&wx, &wy, &cost)?.cost;
            }
        }
        value_next = value;
    }
    Ok(root(value_next[0], p))
}
