pub mod complexity;
pub mod dynamic_fit;
pub mod metric;
pub mod paths;
pub mod static_fit;

use ght_core::qas::{BaseSpace, Mixer, QasSpace, WassersteinSpace};
use serde::Deserialize;

use crate::error::{HarnessError, Result};

/// `W_1` on the real line.
pub fn line_space() -> QasSpace {
    QasSpace::WassersteinConvex(WassersteinSpace { dim: 1, p: 1.0, moment: 2.0, base: BaseSpace::Euclidean, mixer: Mixer::Convex })
}

/// `count` equally spaced points of `[lo, hi]`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Interval {
    pub fn points(&self) -> Result<Vec<Vec<f64>>> {
        if self.count == 0 || !(self.lo <= self.hi) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(HarnessError::config("an interval needs lo <= hi and count >= 1"));
        }
        if self.count == 1 {
            return Ok(vec![vec![self.lo]]);
        }
        let step = (self.hi - self.lo) / (self.count - 1) as f64;
        Ok((0..self.count).map(|i| vec![if i + 1 == self.count { self.hi } else { self.lo + step * i as f64 }]).collect())
    }
}
