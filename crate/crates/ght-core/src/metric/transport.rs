//! Network simplex on the bipartite transportation graph.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{ensure_finite, invalid, Error, Result};

/// Optimal plan of a transportation problem together with its dual.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub cost: f64,
    /// Basic cells `(i, j, flow)` with positive flow.
    pub flows: Vec<(usize, usize, f64)>,
    pub row_potentials: Vec<f64>,
    pub col_potentials: Vec<f64>,
}

/// Minimises `sum c_ij pi_ij` over couplings of `a` and `b`.
///
/// `cost` is row-major `a.len() x b.len()`. The basis starts at the
/// north-west corner solution; entering cells follow Dantzig's rule and fall
/// back to Bland's rule after a run of degenerate pivots.
pub fn solve_transport(a: &[f64], b: &[f64], cost: &[f64]) -> Result<TransportPlan> {
    let (m, n) = (a.len(), b.len());
    if m == 0 || n == 0 {
        return Err(invalid("transport marginals must be non-empty"));
    }
    if cost.len() != m * n {
        return Err(Error::DimensionMismatch { expected: m * n, got: cost.len() });
    }
    ensure_finite(a, "transport supply")?;
    ensure_finite(b, "transport demand")?;
    ensure_finite(cost, "transport cost")?;

    let mut ra = a.to_vec();
    let mut rb = b.to_vec();
    let mut basis: Vec<(usize, usize)> = Vec::with_capacity(m + n - 1);
    let mut flow: Vec<f64> = Vec::with_capacity(m + n - 1);
    let mut is_basic = vec![false; m * n];
    let (mut i, mut j) = (0, 0);
    loop {
        let x = ra[i].min(rb[j]).max(0.0);
        basis.push((i, j));
        flow.push(x);
        is_basic[i * n + j] = true;
        ra[i] -= x;
        rb[j] -= x;
        if i == m - 1 && j == n - 1 {
            break;
        }
        if i == m - 1 {
            j += 1;
        } else if j == n - 1 || ra[i] <= rb[j] {
            i += 1;
        } else {
            j += 1;
        }
    }

    let cmax = cost.iter().fold(0.0f64, |acc, c| acc.max(c.abs()));
    let tol = 1e-12 * (1.0 + cmax);
    let mut u = vec![0.0; m];
    let mut v = vec![0.0; n];
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); m + n];
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; m + n];
    let mut stack: Vec<usize> = Vec::with_capacity(m + n);
    let mut degenerate_run = 0usize;
    let max_iter = 1000 + 50 * (m + n) * m.max(n);

    for _ in 0..max_iter {
        for list in adj.iter_mut() {
            list.clear();
        }
        for (k, &(bi, bj)) in basis.iter().enumerate() {
            adj[bi].push((m + bj, k));
            adj[m + bj].push((bi, k));
        }

        // Dual potentials from the spanning tree, rooted at row 0.
        for p in parent.iter_mut() {
            *p = None;
        }
        let mut seen = vec![false; m + n];
        seen[0] = true;
        u[0] = 0.0;
        stack.clear();
        stack.push(0);
        while let Some(node) = stack.pop() {
            for &(nb, k) in &adj[node] {
                if seen[nb] {
                    continue;
                }
                seen[nb] = true;
                let (bi, bj) = basis[k];
                let c = cost[bi * n + bj];
                if nb >= m {
                    v[nb - m] = c - u[bi];
                } else {
                    u[nb] = c - v[bj];
                }
                stack.push(nb);
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Numeric("transport basis is not a spanning tree".into()));
        }

        let bland = degenerate_run > m + n;
        let mut entering = None;
        let mut best = -tol;
        'price: for pi in 0..m {
            for pj in 0..n {
                if is_basic[pi * n + pj] {
                    continue;
                }
                let r = cost[pi * n + pj] - u[pi] - v[pj];
                if r < -tol {
                    if bland {
                        entering = Some((pi, pj));
                        break 'price;
                    }
                    if r < best {
                        best = r;
                        entering = Some((pi, pj));
                    }
                }
            }
        }
        let Some((ei, ej)) = entering else {
            let total = basis.iter().zip(&flow).map(|(&(bi, bj), &f)| f * cost[bi * n + bj]).sum();
            let flows = basis
                .iter()
                .zip(&flow)
                .filter(|(_, &f)| f > 0.0)
                .map(|(&(bi, bj), &f)| (bi, bj, f))
                .collect();
            return Ok(TransportPlan { cost: total, flows, row_potentials: u, col_potentials: v });
        };

        // Tree path from the entering column back to the entering row.
        let mut seen = vec![false; m + n];
        seen[ei] = true;
        stack.clear();
        stack.push(ei);
        while let Some(node) = stack.pop() {
            if node == m + ej {
                break;
            }
            for &(nb, k) in &adj[node] {
                if !seen[nb] {
                    seen[nb] = true;
                    parent[nb] = Some((node, k));
                    stack.push(nb);
                }
            }
        }
        let mut path = Vec::new();
        let mut node = m + ej;
        while node != ei {
            let (p, k) = parent[node].ok_or_else(|| Error::Numeric("broken transport tree".into()))?;
            path.push(k);
            node = p;
        }

        // Even positions lose flow, odd positions gain it.
        let mut theta = f64::INFINITY;
        let mut leave = usize::MAX;
        for (pos, &k) in path.iter().enumerate() {
            if pos % 2 != 0 {
                continue;
            }
            let f = flow[k];
            let better = f < theta
                || (bland && f == theta && {
                    let (li, lj) = basis[leave];
                    let (ki, kj) = basis[k];
                    ki * n + kj < li * n + lj
                });
            if better {
                theta = f;
                leave = k;
            }
        }
        for (pos, &k) in path.iter().enumerate() {
            if pos % 2 == 0 {
                flow[k] = (flow[k] - theta).max(0.0);
            } else {
                flow[k] += theta;
            }
        }
        degenerate_run = if theta > 0.0 { 0 } else { degenerate_run + 1 };
        let (li, lj) = basis[leave];
        is_basic[li * n + lj] = false;
        is_basic[ei * n + ej] = true;
        basis[leave] = (ei, ej);
        flow[leave] = theta;
    }
    Err(Error::Numeric("network simplex did not converge".into()))
}
