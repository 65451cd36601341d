use alloc::vec::Vec;

use super::measure::DiscreteMeasure;
use super::transport::{solve_transport, TransportPlan};
use crate::error::{invalid, Error, Result};

/// `||x - y||^p` in the Euclidean norm.
pub fn ground_cost(x: &[f64], y: &[f64], p: f64) -> f64 {
    let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    if p == 2.0 {
        sq
    } else if p == 1.0 {
        libm::sqrt(sq)
    } else {
        libm::pow(libm::sqrt(sq), p)
    }
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p >= 1.0 {
        Ok(())
    } else {
        Err(invalid("Wasserstein exponent must be finite and >= 1"))
    }
}

pub(crate) fn root(opt: f64, p: f64) -> f64 {
    let opt = opt.max(0.0);
    if p == 1.0 {
        opt
    } else if p == 2.0 {
        libm::sqrt(opt)
    } else {
        libm::pow(opt, 1.0 / p)
    }
}

fn check_dims(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<()> {
    if mu.dim() != nu.dim() {
        Err(Error::DimensionMismatch { expected: mu.dim(), got: nu.dim() })
    } else {
        Ok(())
    }
}

/// Optimal coupling for the cost `||x - y||^p`.
pub fn optimal_coupling(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> Result<TransportPlan> {
    check_exponent(p)?;
    check_dims(mu, nu)?;
    let mut cost = Vec::with_capacity(mu.len() * nu.len());
    for i in 0..mu.len() {
        for j in 0..nu.len() {
            cost.push(ground_cost(mu.atom(i), nu.atom(j), p));
        }
    }
    solve_transport(mu.weights(), nu.weights(), &cost)
}

/// `W_p` through the transportation linear program, in any dimension.
pub fn wasserstein_p_lp(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> Result<f64> {
    Ok(root(optimal_coupling(mu, nu, p)?.cost, p))
}

/// Exact `W_p` between finitely supported measures.
///
/// On the line the monotone (quantile) coupling is optimal for every
/// `p >= 1` and is used directly; otherwise the transport LP is solved.
pub fn wasserstein_p(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> Result<f64> {
    check_exponent(p)?;
    check_dims(mu, nu)?;
    if mu.dim() == 1 {
        Ok(root(monotone_cost(mu, nu, p), p))
    } else {
        wasserstein_p_lp(mu, nu, p)
    }
}

fn monotone_cost(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> f64 {
    let (x, a) = (mu.atoms_flat(), mu.weights());
    let (y, b) = (nu.atoms_flat(), nu.weights());
    let (mut i, mut j) = (0, 0);
    let (mut ra, mut rb) = (a[0], b[0]);
    let mut total = 0.0;
    loop {
        let mass = ra.min(rb);
        if mass > 0.0 {
            total += mass * ground_cost(&x[i..=i], &y[j..=j], p);
        }
        ra -= mass;
        rb -= mass;
        if ra <= rb {
            i += 1;
            if i == x.len() {
                break;
            }
            ra = a[i];
        } else {
            j += 1;
            if j == y.len() {
                break;
            }
            rb = b[j];
        }
    }
    total
}
