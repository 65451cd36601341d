use alloc::vec::Vec;

use super::space::{QasPoint, QasSpace};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulusEstimate {
    pub q: usize,
    pub worst_error: f64,
}

/// Smallest level `q <= q_cap` at which every sample point encodes with
/// error below `eps`. Valid for the sample only.
pub fn quantization_modulus_estimate(
    space: &QasSpace,
    sample: &[QasPoint],
    eps: f64,
    q_cap: usize,
) -> Result<ModulusEstimate> {
    if !(eps > 0.0) {
        return Err(invalid("modulus target must be positive"));
    }
    if sample.is_empty() {
        return Err(invalid("modulus sample is empty"));
    }
    let mut best = ModulusEstimate { q: 0, worst_error: f64::INFINITY };
    for q in 1..=q_cap {
        let mut worst: f64 = 0.0;
        for y in sample {
            worst = worst.max(space.encode_point(y, q)?.1);
        }
        if worst < eps {
            return Ok(ModulusEstimate { q, worst_error: worst });
        }
        if worst < best.worst_error {
            best = ModulusEstimate { q, worst_error: worst };
        }
    }
    Err(Error::CappedSearch { cap: q_cap, best_q: best.q, best_error: best.worst_error })
}

/// `min_i [C_eta (sum_j w_j d(y_i, y_j)^p)^{1/p} - d(eta(w, Y), y_i)]`.
///
/// Non-negative whenever the space's declared mixing constants hold.
pub fn simplicial_defect(space: &QasSpace, w: &[f64], points: &[QasPoint]) -> Result<f64> {
    let (c_eta, p) = space.mixing_constants();
    let eta = space.mix(w, points)?;
    let n = points.len();
    let mut dist = alloc::vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = space.distance(&points[i], &points[j])?;
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    let to_eta: Vec<f64> = points.iter().map(|y| space.distance(&eta, y)).collect::<Result<_>>()?;
    let mut worst = f64::INFINITY;
    for i in 0..n {
        let s: f64 = (0..n).map(|j| w[j] * libm::pow(dist[i * n + j], p)).sum();
        let bound = c_eta * libm::pow(s, 1.0 / p);
        worst = worst.min(bound - to_eta[i]);
    }
    Ok(worst)
}
