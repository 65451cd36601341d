use alloc::vec::Vec;

use crate::error::{ensure_finite, invalid, Error, Result};

/// Euclidean projection onto the probability simplex (sort and threshold).
///
/// Ties in the sort are broken by index, so the result is deterministic.
pub fn project_simplex(u: &[f64]) -> Result<Vec<f64>> {
    if u.is_empty() {
        return Err(invalid("cannot project an empty vector"));
    }
    ensure_finite(u, "simplex projection input")?;
    let mut order: Vec<usize> = (0..u.len()).collect();
    order.sort_by(|&a, &b| u[b].total_cmp(&u[a]).then(a.cmp(&b)));
    // The projection commutes with shifts along the all-ones vector.
    let top = u[order[0]];
    let u: Vec<f64> = u.iter().map(|&x| x - top).collect();
    let mut cum = 0.0;
    let mut tau = 0.0;
    let mut support = 0;
    for (k, &i) in order.iter().enumerate() {
        cum += u[i];
        let t = (cum - 1.0) / (k + 1) as f64;
        if u[i] - t > 0.0 {
            tau = t;
            support = k + 1;
        } else {
            break;
        }
    }
    if support == 1 {
        let mut e = alloc::vec![0.0; u.len()];
        e[order[0]] = 1.0;
        return Ok(e);
    }
    Ok(u.iter().map(|&x| (x - tau).max(0.0)).collect())
}

/// Vector-Jacobian product of the simplex projection at output `w`.
///
/// On the support `S = {i : w_i > 0}` the Jacobian is `I - 11^T/|S|`; off
/// the support it vanishes. Ties at the threshold fall outside the support.
pub fn simplex_projection_vjp(w: &[f64], g: &[f64]) -> Vec<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for (&wi, &gi) in w.iter().zip(g) {
        if wi > 0.0 {
            sum += gi;
            count += 1;
        }
    }
    let mean = if count > 0 { sum / count as f64 } else { 0.0 };
    w.iter()
        .zip(g)
        .map(|(&wi, &gi)| if wi > 0.0 { gi - mean } else { 0.0 })
        .collect()
}

/// Componentwise clamp onto `[lo, hi]`.
pub fn project_cube(z: &[f64], lo: &[f64], hi: &[f64]) -> Result<Vec<f64>> {
    if lo.len() != z.len() {
        return Err(Error::DimensionMismatch { expected: z.len(), got: lo.len() });
    }
    if hi.len() != z.len() {
        return Err(Error::DimensionMismatch { expected: z.len(), got: hi.len() });
    }
    ensure_finite(z, "cube projection input")?;
    z.iter()
        .zip(lo.iter().zip(hi))
        .map(|(&x, (&a, &b))| {
            if a > b {
                Err(invalid("cube bounds must satisfy lo <= hi"))
            } else {
                Ok(x.clamp(a, b))
            }
        })
        .collect()
}

/// A validated point of the probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexWeight(Vec<f64>);

impl SimplexWeight {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(invalid("empty simplex weight"));
        }
        ensure_finite(&w, "simplex weight")?;
        if w.iter().any(|&x| x < 0.0) {
            return Err(invalid("simplex weight has a negative entry"));
        }
        let s: f64 = w.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(invalid("simplex weight does not sum to one"));
        }
        Ok(Self(w))
    }

    pub fn vertex(n: usize, i: usize) -> Self {
        let mut w = alloc::vec![0.0; n];
        w[i] = 1.0;
        Self(w)
    }

    pub fn project(u: &[f64]) -> Result<Self> {
        project_simplex(u).map(Self)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}
