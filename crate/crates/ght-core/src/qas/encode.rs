use alloc::vec;
use alloc::vec::Vec;

use super::space::{QasPoint, QasSpace, QuantizationCode};
use crate::error::{invalid, Error, Result};
use crate::metric::{spd_log, DiscreteMeasure};

/// Splits `q` slots proportionally to `mass` by largest remainders
/// (ties to the lower index).
pub(crate) fn allocate_slots(mass: &[f64], q: usize) -> Vec<usize> {
    let total: f64 = mass.iter().sum();
    let scaled: Vec<f64> = mass.iter().map(|m| m / total * q as f64).collect();
    let mut slots: Vec<usize> = scaled.iter().map(|s| libm::floor(*s) as usize).collect();
    let used: usize = slots.iter().sum();
    let mut order: Vec<usize> = (0..mass.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = scaled[a] - slots[a] as f64;
        let rb = scaled[b] - slots[b] as f64;
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(q.saturating_sub(used)) {
        slots[i] += 1;
    }
    slots
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Greedy k-center on the atoms followed by proportional slot allocation.
fn k_center_code(m: &DiscreteMeasure, q: usize) -> Vec<f64> {
    let n = m.len();
    let centers: Vec<usize> = if n <= q {
        (0..n).collect()
    } else {
        let mut first = 0;
        for i in 1..n {
            if m.weight(i) > m.weight(first) {
                first = i;
            }
        }
        let mut chosen = vec![first];
        let mut gap: Vec<f64> = (0..n).map(|i| squared_distance(m.atom(i), m.atom(first))).collect();
        while chosen.len() < q {
            let mut far = 0;
            for i in 1..n {
                if gap[i] > gap[far] {
                    far = i;
                }
            }
            if gap[far] == 0.0 {
                break;
            }
            chosen.push(far);
            for i in 0..n {
                gap[i] = gap[i].min(squared_distance(m.atom(i), m.atom(far)));
            }
        }
        chosen
    };
    let mut mass = vec![0.0; centers.len()];
    for i in 0..n {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (k, &c) in centers.iter().enumerate() {
            let d = squared_distance(m.atom(i), m.atom(c));
            if d < best_d {
                best_d = d;
                best = k;
            }
        }
        mass[best] += m.weight(i);
    }
    let slots = allocate_slots(&mass, q);
    let mut z = Vec::with_capacity(q * m.dim());
    for (k, &c) in centers.iter().enumerate() {
        for _ in 0..slots[k] {
            z.extend_from_slice(m.atom(c));
        }
    }
    z
}

/// Mid-quantiles `F^{-1}((2s + 1) / (2q))` of a measure on the line.
pub(crate) fn mid_quantiles(m: &DiscreteMeasure, q: usize) -> Vec<f64> {
    let mut cum = Vec::with_capacity(m.len());
    let mut acc = 0.0;
    for &w in m.weights() {
        acc += w;
        cum.push(acc);
    }
    (0..q)
        .map(|s| {
            let u = (2 * s + 1) as f64 / (2 * q) as f64;
            // Cumulative sums carry rounding; exact ties resolve to the left.
            let k = cum.iter().position(|&c| c >= u - 1e-12).unwrap_or(m.len() - 1);
            m.atom(k)[0]
        })
        .collect()
}

impl QasSpace {
    /// A level-`q` code for `y` and the distance from `y` to its image.
    ///
    /// Measures on the line use mid-quantiles; higher-dimensional measures
    /// use greedy k-center snapping with proportional slot allocation; path
    /// laws are snapped to the adapted grid; linear spaces truncate the
    /// coefficient expansion; Gaussians and exponential families are encoded
    /// exactly.
    pub fn encode_point(&self, y: &QasPoint, q: usize) -> Result<(QuantizationCode, f64)> {
        if q == 0 {
            return Err(invalid("quantization level must be positive"));
        }
        let z = match self {
            Self::WassersteinConvex(s) => {
                let m = y.as_measure().ok_or_else(|| invalid("expected a discrete measure"))?;
                if m.dim() != s.dim {
                    return Err(Error::DimensionMismatch { expected: s.dim, got: m.dim() });
                }
                if s.dim == 1 {
                    mid_quantiles(m, q)
                } else {
                    k_center_code(m, q)
                }
            }
            Self::AdaptedEmpirical(s) => {
                let pm = y.as_path().ok_or_else(|| invalid("expected a path measure"))?;
                if pm.step_dim() != s.dim || pm.horizon() != s.horizon {
                    return Err(Error::DimensionMismatch { expected: s.path_len(), got: pm.law().dim() });
                }
                let cells = s.cells(q);
                let law = pm.law();
                let snapped: Vec<f64> = law.atoms_flat().iter().map(|&x| s.snap(x, cells)).collect();
                let grid = DiscreteMeasure::new(s.path_len(), snapped, law.weights().to_vec())?;
                let slots = allocate_slots(grid.weights(), q);
                let mut z = Vec::with_capacity(q * s.path_len());
                for (k, &n) in slots.iter().enumerate() {
                    for _ in 0..n {
                        z.extend_from_slice(grid.atom(k));
                    }
                }
                z
            }
            Self::LinearSchauder(_) | Self::ForwardRateRkhs(_) => {
                let v = y.as_vector().ok_or_else(|| invalid("expected a coefficient vector"))?;
                (0..q).map(|i| v.get(i).copied().unwrap_or(0.0)).collect()
            }
            Self::GaussianSpd(s) => {
                let g = y.as_gaussian().ok_or_else(|| invalid("expected a Gaussian"))?;
                if g.dim() != s.dim {
                    return Err(Error::DimensionMismatch { expected: s.dim, got: g.dim() });
                }
                let log = spd_log(g.cov())?;
                let mut z = g.mean().to_vec();
                for i in 0..s.dim {
                    for j in i..s.dim {
                        z.push(log[(i, j)]);
                    }
                }
                z
            }
            Self::ExponentialFamily(_) => {
                let v = y.as_vector().ok_or_else(|| invalid("expected a parameter vector"))?;
                v.iter().map(|x| x.clamp(0.0, 1.0)).collect()
            }
        };
        let code = QuantizationCode { level: q, z };
        let image = self.quantize(&code)?;
        let err = self.distance(y, &image)?;
        Ok((code, err))
    }
}
