use alloc::vec;
use alloc::vec::Vec;

use libm::sqrt;

use super::activation::ActivationKind;
use super::index::{Decomposed, HiddenLayer, MultiIndex};
use super::network::Network;
use crate::error::{invalid, Error, Result};
use crate::rng::{normal, seeded};

/// Smallest `M` with `2 floor(M/2) floor(M/(4P)) >= N_T`.
pub fn hypernetwork_size(p: usize, n_t: usize) -> Result<usize> {
    if p == 0 || n_t == 0 {
        return Err(invalid("hypernetwork size needs P >= 1 and N_T >= 1"));
    }
    let mut m = 1;
    while 2 * (m / 2) * (m / (4 * p)) < n_t {
        m += 1;
    }
    Ok(m)
}

#[derive(Debug, Clone)]
pub struct Memorizer {
    pub network: Network,
    /// Projection direction used to order the keys.
    pub direction: Vec<f64>,
    /// `max_n |h(v_n) - v_{n+1}|_inf` measured after construction.
    pub residual: f64,
}

const DIRECTION_TRIALS: u64 = 16;

/// Builds a ReLU network of shape `[P, M, M, P]` interpolating `pairs`.
///
/// Keys are projected on a seeded random direction (best relative gap of
/// several draws); the first layer holds hinge units `relu(<w, x> - s_k)`,
/// the second copies them, and the readout realizes the piecewise-linear
/// interpolant of every output coordinate through the sorted keys.
pub fn memorize_sequence(pairs: &[(Vec<f64>, Vec<f64>)], p: usize, n_t: usize, seed: u64) -> Result<Memorizer> {
    if pairs.is_empty() {
        return Err(invalid("nothing to memorize"));
    }
    for (k, v) in pairs {
        if k.len() != p {
            return Err(Error::DimensionMismatch { expected: p, got: k.len() });
        }
        if v.len() != p {
            return Err(Error::DimensionMismatch { expected: p, got: v.len() });
        }
    }
    for i in 0..pairs.len() {
        for j in 0..i {
            if pairs[i].0 == pairs[j].0 {
                return Err(Error::Domain(alloc::format!("keys {j} and {i} coincide; keys must be distinct")));
            }
        }
    }
    let kcount = pairs.len();
    let width = hypernetwork_size(p, n_t)?.max(kcount.saturating_sub(1)).max(1);

    let mut rng = seeded(seed);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..DIRECTION_TRIALS {
        let mut w: Vec<f64> = (0..p).map(|_| normal(&mut rng)).collect();
        let norm = sqrt(w.iter().map(|x| x * x).sum());
        w.iter_mut().for_each(|x| *x /= norm);
        let mut s: Vec<f64> = pairs.iter().map(|(k, _)| dot(&w, k)).collect();
        s.sort_by(f64::total_cmp);
        let spread = s[kcount - 1] - s[0];
        let gap = s.windows(2).map(|g| g[1] - g[0]).fold(f64::INFINITY, f64::min);
        let score = if kcount == 1 { 1.0 } else { gap / spread.max(f64::MIN_POSITIVE) };
        if best.as_ref().is_none_or(|(b, _)| score > *b) {
            best = Some((score, w));
        }
    }
    let (score, w) = best.unwrap();
    if !(score > 0.0) {
        return Err(Error::Numeric("no projection separates the keys".into()));
    }

    let mut order: Vec<(f64, usize)> = pairs.iter().enumerate().map(|(i, (k, _))| (dot(&w, k), i)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let s: Vec<f64> = order.iter().map(|o| o.0).collect();
    let y: Vec<&[f64]> = order.iter().map(|o| pairs[o.1].1.as_slice()).collect();

    // Layer 1: unit k = relu(<w, x> - s_k) for k < K - 1.
    let mut a1 = vec![0.0; width * p];
    let mut b1 = vec![0.0; width];
    for k in 0..kcount - 1 {
        a1[k * p..(k + 1) * p].copy_from_slice(&w);
        b1[k] = -s[k];
    }
    let mut a2 = vec![0.0; width * width];
    for k in 0..width {
        a2[k * width + k] = 1.0;
    }
    // Readout: y_0 + sum_k (m_k - m_{k-1}) relu(s - s_k), with m_{-1} = 0.
    let mut a3 = vec![0.0; p * width];
    let c = y[0].to_vec();
    let mut prev = vec![0.0; p];
    for k in 0..kcount - 1 {
        let h = s[k + 1] - s[k];
        for i in 0..p {
            let slope = (y[k + 1][i] - y[k][i]) / h;
            a3[i * width + k] = slope - prev[i];
            prev[i] = slope;
        }
    }
    let relu = vec![[1.0, 0.0]; width];
    let parts = Decomposed {
        hidden: vec![
            HiddenLayer { a: a1, b: b1, alpha: relu.clone() },
            HiddenLayer { a: a2, b: vec![0.0; width], alpha: relu },
        ],
        a: a3,
        c,
    };
    let network = Network::from_parts(MultiIndex::new(vec![p, width, width, p])?, ActivationKind::Singular, &parts)?;
    let mut residual: f64 = 0.0;
    for (k, v) in pairs {
        let out = network.forward(k)?;
        for (a, b) in out.iter().zip(v) {
            residual = residual.max((a - b).abs());
        }
    }
    Ok(Memorizer { network, direction: w, residual })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
