use alloc::sync::Arc;
use alloc::vec::Vec;

use super::grid::PathWindow;
use crate::error::{invalid, Error, Result};
use crate::qas::QasPoint;

pub type EncoderFn = Arc<dyn Fn(f64, &[f64]) -> Result<Vec<f64>> + Send + Sync>;
pub type DecoderFn = Arc<dyn Fn(&[f64]) -> Result<QasPoint> + Send + Sync>;

/// A causal map whose value at `t_n` depends on `x_{t_{n-m}:t_n}` only.
pub trait CausalMap {
    fn memory(&self) -> usize;
    fn eval(&self, path: &PathWindow, n: i64) -> Result<QasPoint>;
}

/// `x -> (rho(f(t_n, x_{t_{n-m}:t_n})))_n`.
#[derive(Clone)]
pub struct FiniteComplexityMap {
    pub memory: usize,
    /// State dimension `d` of the input path.
    pub input_dim: usize,
    pub latent_dim: usize,
    pub holder_exponent: f64,
    pub time_homogeneous: bool,
    pub encoder: EncoderFn,
    pub decoder: DecoderFn,
}

impl core::fmt::Debug for FiniteComplexityMap {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("FiniteComplexityMap")
            .field("memory", &self.memory)
            .field("input_dim", &self.input_dim)
            .field("latent_dim", &self.latent_dim)
            .field("holder_exponent", &self.holder_exponent)
            .field("time_homogeneous", &self.time_homogeneous)
            .finish_non_exhaustive()
    }
}

impl FiniteComplexityMap {
    pub fn new(
        memory: usize,
        input_dim: usize,
        latent_dim: usize,
        encoder: EncoderFn,
        decoder: DecoderFn,
    ) -> Result<Self> {
        if input_dim == 0 || latent_dim == 0 {
            return Err(invalid("finite-complexity maps need positive input and latent dimensions"));
        }
        Ok(Self { memory, input_dim, latent_dim, holder_exponent: 1.0, time_homogeneous: false, encoder, decoder })
    }

    pub fn homogeneous(mut self, flag: bool) -> Self {
        self.time_homogeneous = flag;
        self
    }

    pub fn with_holder_exponent(mut self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(invalid("Hoelder exponent must lie in (0, 1]"));
        }
        self.holder_exponent = alpha;
        Ok(self)
    }

    /// `f(t_n, x_{t_{n-m}:t_n})`.
    pub fn encode(&self, path: &PathWindow, n: i64) -> Result<Vec<f64>> {
        if path.dim() != self.input_dim {
            return Err(Error::DimensionMismatch { expected: self.input_dim, got: path.dim() });
        }
        let seg = path.segment(n, self.memory)?;
        let t = path.grid().t(n)?;
        let u = (self.encoder)(t, seg)?;
        if u.len() != self.latent_dim {
            return Err(Error::DimensionMismatch { expected: self.latent_dim, got: u.len() });
        }
        Ok(u)
    }

    pub fn decode(&self, u: &[f64]) -> Result<QasPoint> {
        (self.decoder)(u)
    }
}

impl CausalMap for FiniteComplexityMap {
    fn memory(&self) -> usize {
        self.memory
    }

    fn eval(&self, path: &PathWindow, n: i64) -> Result<QasPoint> {
        eval_finite_complexity(self, path, n)
    }
}

pub fn eval_finite_complexity(map: &FiniteComplexityMap, path: &PathWindow, n: i64) -> Result<QasPoint> {
    let u = map.encode(path, n)?;
    map.decode(&u)
}

pub type FamilyFn = Arc<dyn Fn(f64) -> Result<FiniteComplexityMap> + Send + Sync>;
pub type CompressionFn = Arc<dyn Fn(i64, f64) -> f64 + Send + Sync>;

/// `eps -> F^{f_eps, rho_eps}` together with the compression rate `c_AC`.
#[derive(Clone)]
pub struct AcMapSpec {
    pub family: FamilyFn,
    pub compression: CompressionFn,
}

impl core::fmt::Debug for AcMapSpec {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("AcMapSpec").finish_non_exhaustive()
    }
}

impl AcMapSpec {
    pub fn at(&self, eps: f64) -> Result<FiniteComplexityMap> {
        if !(eps > 0.0) {
            return Err(invalid("eps must be positive"));
        }
        (self.family)(eps)
    }

    /// `c_AC(n, eps)`, rejected when below 1.
    pub fn c_ac(&self, n: i64, eps: f64) -> Result<f64> {
        let c = (self.compression)(n, eps);
        if c >= 1.0 {
            Ok(c)
        } else {
            Err(Error::Domain(alloc::format!("c_AC({n}, {eps}) = {c} is below 1")))
        }
    }

    /// A finite-complexity map seen as an AC map with `c_AC = 1`.
    pub fn exact(map: FiniteComplexityMap) -> Self {
        Self { family: Arc::new(move |_| Ok(map.clone())), compression: Arc::new(|_, _| 1.0) }
    }
}
