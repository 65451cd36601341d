use alloc::vec::Vec;

use crate::error::{ensure_finite, invalid, Error, Result};

/// Finite window `t_a < ... < t_b` of a time grid with `t_0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
    start: i64,
    delta_minus: f64,
    delta_plus: f64,
}

/// Checks a window of grid times and locates the index of `t_0 = 0`.
pub fn grid_validate(times: &[f64]) -> Result<TimeGrid> {
    ensure_finite(times, "time grid")?;
    if times.len() < 2 {
        return Err(Error::Domain("a time grid needs at least two times".into()));
    }
    let mut dmin = f64::INFINITY;
    let mut dmax: f64 = 0.0;
    for w in times.windows(2) {
        let gap = w[1] - w[0];
        if !(gap > 0.0) {
            return Err(Error::Domain("grid times must be strictly increasing".into()));
        }
        dmin = dmin.min(gap);
        dmax = dmax.max(gap);
    }
    let zero = times
        .iter()
        .position(|&t| t == 0.0)
        .ok_or_else(|| Error::Domain("grid must contain t_0 = 0".into()))?;
    Ok(TimeGrid { times: times.to_vec(), start: -(zero as i64), delta_minus: dmin, delta_plus: dmax })
}

impl TimeGrid {
    /// `t_n = n * step` for `n` in `lo..=hi`.
    pub fn uniform(lo: i64, hi: i64, step: f64) -> Result<Self> {
        if lo > 0 || hi < 0 || lo == hi {
            return Err(invalid("uniform grid needs lo <= 0 <= hi with lo < hi"));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(invalid("grid step must be positive"));
        }
        let times: Vec<f64> = (lo..=hi).map(|n| n as f64 * step).collect();
        grid_validate(&times)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// First stored index `a`.
    pub fn start(&self) -> i64 {
        self.start
    }

    /// Last stored index `b`.
    pub fn end(&self) -> i64 {
        self.start + self.times.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn contains(&self, n: i64) -> bool {
        n >= self.start && n <= self.end()
    }

    fn slot(&self, n: i64) -> Result<usize> {
        if self.contains(n) {
            Ok((n - self.start) as usize)
        } else {
            Err(Error::OutOfWindow { index: n, lo: self.start, hi: self.end() })
        }
    }

    pub fn t(&self, n: i64) -> Result<f64> {
        Ok(self.times[self.slot(n)?])
    }

    /// `t_{n+1} - t_n`.
    pub fn dt(&self, n: i64) -> Result<f64> {
        Ok(self.t(n + 1)? - self.t(n)?)
    }

    pub fn delta_minus(&self) -> f64 {
        self.delta_minus
    }

    pub fn delta_plus(&self) -> f64 {
        self.delta_plus
    }

    /// Sub-window `lo..=hi`, which must contain 0.
    pub fn restrict(&self, lo: i64, hi: i64) -> Result<Self> {
        let (a, b) = (self.slot(lo)?, self.slot(hi)?);
        grid_validate(&self.times[a..=b])
    }
}

/// Values `x_{t_a}, ..., x_{t_b}` of a path in `R^d` on a grid window.
#[derive(Debug, Clone, PartialEq)]
pub struct PathWindow {
    grid: TimeGrid,
    dim: usize,
    values: Vec<f64>,
}

impl PathWindow {
    pub fn new(grid: TimeGrid, values: &[Vec<f64>]) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), got: values.len() });
        }
        let dim = values[0].len();
        if dim == 0 {
            return Err(invalid("path values need a positive dimension"));
        }
        if let Some(v) = values.iter().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
        }
        let flat = values.concat();
        ensure_finite(&flat, "path values")?;
        Ok(Self { grid, dim, values: flat })
    }

    /// A constant path on the whole grid window.
    pub fn constant(grid: TimeGrid, x: &[f64]) -> Result<Self> {
        let values: Vec<Vec<f64>> = (0..grid.len()).map(|_| x.to_vec()).collect();
        Self::new(grid, &values)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Index `a` of the first stored value.
    pub fn offset(&self) -> i64 {
        self.grid.start()
    }

    pub fn end(&self) -> i64 {
        self.grid.end()
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn at(&self, n: i64) -> Result<&[f64]> {
        let s = self.grid.slot(n)? * self.dim;
        Ok(&self.values[s..s + self.dim])
    }

    pub fn at_mut(&mut self, n: i64) -> Result<&mut [f64]> {
        let s = self.grid.slot(n)? * self.dim;
        Ok(&mut self.values[s..s + self.dim])
    }

    /// `x_{t_{n-m}}, ..., x_{t_n}` concatenated in time order.
    pub fn segment(&self, n: i64, m: usize) -> Result<&[f64]> {
        let lo = n - m as i64;
        if !self.grid.contains(lo) || !self.grid.contains(n) {
            let index = if self.grid.contains(n) { lo } else { n };
            return Err(Error::OutOfWindow { index, lo: self.offset(), hi: self.end() });
        }
        let s = self.grid.slot(lo)? * self.dim;
        let e = (self.grid.slot(n)? + 1) * self.dim;
        Ok(&self.values[s..e])
    }

    pub fn values(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.dim).map(|c| c.to_vec()).collect()
    }

    pub fn values_flat(&self) -> &[f64] {
        &self.values
    }

    pub fn indices(&self) -> core::ops::RangeInclusive<i64> {
        self.offset()..=self.end()
    }
}
