use alloc::vec::Vec;

use super::measure::DiscreteMeasure;
use crate::error::{invalid, Error, Result};

/// Exact `W_2` barycenter of measures on the line: the weighted average of
/// quantile functions, evaluated on the union of their breakpoints.
pub fn wasserstein2_barycenter_1d(weights: &[f64], measures: &[&DiscreteMeasure]) -> Result<DiscreteMeasure> {
    if weights.len() != measures.len() || measures.is_empty() {
        return Err(Error::DimensionMismatch { expected: measures.len(), got: weights.len() });
    }
    if let Some(m) = measures.iter().find(|m| m.dim() != 1) {
        return Err(Error::Unsupported(alloc::format!("barycenter only on the line, got dimension {}", m.dim())));
    }
    if weights.iter().any(|&w| !(w >= 0.0)) {
        return Err(invalid("barycenter weights must be non-negative"));
    }
    let cums: Vec<Vec<f64>> = measures
        .iter()
        .map(|m| {
            let mut acc = 0.0;
            m.weights().iter().map(|w| {
                acc += w;
                acc
            })
            .collect()
        })
        .collect();
    let mut breaks: Vec<f64> = cums.iter().flat_map(|c| c[..c.len() - 1].iter().copied()).collect();
    breaks.push(0.0);
    breaks.push(1.0);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut atoms = Vec::new();
    let mut masses = Vec::new();
    for pair in breaks.windows(2) {
        let mass = pair[1] - pair[0];
        if mass <= 0.0 {
            continue;
        }
        let u = 0.5 * (pair[0] + pair[1]);
        let mut x = 0.0;
        for ((&w, m), cum) in weights.iter().zip(measures).zip(&cums) {
            if w == 0.0 {
                continue;
            }
            let k = cum.iter().position(|&c| c >= u).unwrap_or(cum.len() - 1);
            x += w * m.atom(k)[0];
        }
        atoms.push(x);
        masses.push(mass);
    }
    DiscreteMeasure::new(1, atoms, masses)
}
