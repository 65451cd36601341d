use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use super::bases::{faber_schauder, forward_rate_kernel, geometric_knots, PathStatistic, SchauderBasis};
use crate::error::{ensure_finite, invalid, Error, Result};
use crate::metric::{
    adapted_wasserstein_p, gaussian_distance, project_simplex, spd_exp, spd_log, wasserstein2_barycenter_1d,
    wasserstein_p, DiscreteMeasure, GaussianMeasure, PathMeasure, WEIGHT_TOL,
};

/// Finite code `z` at quantization level `q`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct QuantizationCode {
    pub level: usize,
    pub z: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum QasPoint {
    Measure(DiscreteMeasure),
    Path(PathMeasure),
    Vector(Vec<f64>),
    Gaussian(GaussianMeasure),
}

impl QasPoint {
    pub fn as_measure(&self) -> Option<&DiscreteMeasure> {
        match self {
            Self::Measure(m) => Some(m),
            _ => None,
        }
    }

    pub fn as_path(&self) -> Option<&PathMeasure> {
        match self {
            Self::Path(m) => Some(m),
            _ => None,
        }
    }

    pub fn as_vector(&self) -> Option<&[f64]> {
        match self {
            Self::Vector(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_gaussian(&self) -> Option<&GaussianMeasure> {
        match self {
            Self::Gaussian(g) => Some(g),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(tag = "type", rename_all = "snake_case"))]
pub enum BaseSpace {
    Euclidean,
    /// A bounded subset of `R^d` contained in the ball of this radius.
    Bounded { radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "snake_case"))]
pub enum Mixer {
    #[default]
    Convex,
    /// `W_2` barycenter on the line.
    Barycenter,
}

/// `P_moment(Z)` with the `W_p` metric.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(deny_unknown_fields))]
pub struct WassersteinSpace {
    pub dim: usize,
    pub p: f64,
    pub moment: f64,
    pub base: BaseSpace,
    #[cfg_attr(feature = "serde", serde(default))]
    pub mixer: Mixer,
}

/// Laws of `[0, 1]^d`-valued paths of length `horizon` with `AW_p`,
/// quantized by adapted empirical measures.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(deny_unknown_fields))]
pub struct AdaptedSpace {
    pub dim: usize,
    pub horizon: usize,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(deny_unknown_fields))]
pub struct SchauderSpace {
    pub basis: SchauderBasis,
}

/// Forward-rate curves spanned by kernel sections `K(t_n, .)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(deny_unknown_fields))]
pub struct RkhsSpace {
    pub alpha: f64,
    pub knots: Vec<f64>,
    pub grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(deny_unknown_fields))]
pub struct GaussianSpace {
    pub dim: usize,
}

/// Exponential family with natural parameters in `[0, 1]^d`, compared with
/// the Euclidean distance between parameters.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(deny_unknown_fields))]
pub struct ExpFamilySpace {
    pub statistics: Vec<PathStatistic>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(tag = "kind", rename_all = "snake_case"))]
pub enum QasSpace {
    WassersteinConvex(WassersteinSpace),
    AdaptedEmpirical(AdaptedSpace),
    LinearSchauder(SchauderSpace),
    ForwardRateRkhs(RkhsSpace),
    GaussianSpd(GaussianSpace),
    ExponentialFamily(ExpFamilySpace),
}

impl RkhsSpace {
    pub fn new(alpha: f64, horizon: f64, grid: Vec<f64>) -> Result<Self> {
        let s = Self { alpha, knots: geometric_knots(horizon), grid };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha > 3.0) || !self.alpha.is_finite() {
            return Err(Error::Domain("forward-rate kernel needs alpha > 3".into()));
        }
        if self.knots.is_empty() {
            return Err(invalid("forward-rate space needs at least one knot"));
        }
        ensure_finite(&self.knots, "kernel knots")?;
        if self.knots.iter().any(|&t| t <= 0.0) {
            return Err(invalid("kernel knots must be positive"));
        }
        Ok(())
    }

    pub fn gram(&self) -> DMatrix<f64> {
        let k = self.knots.len();
        DMatrix::from_fn(k, k, |i, j| forward_rate_kernel(self.alpha, self.knots[i], self.knots[j]))
    }

    /// Curve value `sum_n c_n K(t_n, t)`.
    pub fn evaluate(&self, coeffs: &[f64], t: f64) -> f64 {
        coeffs.iter().zip(&self.knots).map(|(c, &tn)| c * forward_rate_kernel(self.alpha, tn, t)).sum()
    }
}

impl AdaptedSpace {
    /// Grid exponent: `1/(T+1)` on the line and `1/(dT)` otherwise.
    pub fn rate(&self) -> f64 {
        if self.dim == 1 {
            1.0 / (self.horizon + 1) as f64
        } else {
            1.0 / (self.dim * self.horizon) as f64
        }
    }

    /// Number of grid cells per axis at level `q`: `q^r`, rounded up when it
    /// is not an integer.
    pub fn cells(&self, q: usize) -> usize {
        let x = libm::pow(q as f64, self.rate());
        let r = libm::round(x);
        let k = if (x - r).abs() < 1e-9 { r } else { libm::ceil(x) };
        (k as usize).max(1)
    }

    pub fn snap(&self, x: f64, cells: usize) -> f64 {
        let k = cells as f64;
        let c = libm::floor(x.clamp(0.0, 1.0) * k).min(k - 1.0);
        (c + 0.5) / k
    }

    pub fn path_len(&self) -> usize {
        self.dim * self.horizon
    }
}

fn vector_norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn padded_diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    (0..n).map(|i| a.get(i).copied().unwrap_or(0.0) - b.get(i).copied().unwrap_or(0.0)).collect()
}

fn upper_len(d: usize) -> usize {
    d * (d + 1) / 2
}

fn sym_from_upper(d: usize, a: &[f64]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(d, d);
    let mut k = 0;
    for i in 0..d {
        for j in i..d {
            m[(i, j)] = a[k];
            m[(j, i)] = a[k];
            k += 1;
        }
    }
    m
}

impl QasSpace {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::WassersteinConvex(s) => {
                if s.dim == 0 {
                    return Err(invalid("dimension must be positive"));
                }
                if !(s.p >= 1.0) || !s.p.is_finite() {
                    return Err(invalid("Wasserstein exponent must be finite and >= 1"));
                }
                match s.base {
                    BaseSpace::Euclidean if !(s.moment > s.p) => {
                        return Err(Error::Domain("unbounded base needs moment order q > p".into()))
                    }
                    BaseSpace::Bounded { radius } if !(s.moment >= s.p) || !(radius > 0.0) => {
                        return Err(Error::Domain("bounded base needs q >= p and a positive radius".into()))
                    }
                    _ => {}
                }
                if s.mixer == Mixer::Barycenter && (s.dim != 1 || s.p != 2.0) {
                    return Err(Error::Unsupported("barycenter mixing needs dimension 1 and p = 2".into()));
                }
                Ok(())
            }
            Self::AdaptedEmpirical(s) => {
                if s.dim == 0 || s.horizon == 0 || !(s.p >= 1.0) || !s.p.is_finite() {
                    return Err(invalid("adapted space needs positive dim, horizon and p >= 1"));
                }
                Ok(())
            }
            Self::LinearSchauder(s) => match s.basis {
                SchauderBasis::FaberSchauder { grid } if grid == 0 => Err(invalid("evaluation grid is empty")),
                _ => Ok(()),
            },
            Self::ForwardRateRkhs(s) => s.validate(),
            Self::GaussianSpd(s) => {
                if s.dim == 0 {
                    Err(invalid("dimension must be positive"))
                } else {
                    Ok(())
                }
            }
            Self::ExponentialFamily(s) => {
                if s.statistics.is_empty() {
                    Err(invalid("exponential family needs at least one statistic"))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Mixing constants `(C_eta, p)` of the simplicial inequality
    /// `d(eta(w, Y), y_i) <= C_eta (sum_j w_j d(y_i, y_j)^p)^{1/p}`.
    pub fn mixing_constants(&self) -> (f64, f64) {
        match self {
            Self::WassersteinConvex(s) => match s.mixer {
                Mixer::Convex => (1.0, s.p),
                Mixer::Barycenter => (2.0, 2.0),
            },
            Self::AdaptedEmpirical(s) => (1.0, s.p),
            Self::LinearSchauder(_) | Self::ForwardRateRkhs(_) | Self::ExponentialFamily(_) => (1.0, 1.0),
            Self::GaussianSpd(_) => (2.0, 1.0),
        }
    }

    /// Length `D_q` of a code at level `q`.
    pub fn code_len(&self, q: usize) -> usize {
        match self {
            Self::WassersteinConvex(s) => s.dim * q,
            Self::AdaptedEmpirical(s) => s.path_len() * q,
            Self::LinearSchauder(_) | Self::ForwardRateRkhs(_) => q,
            Self::GaussianSpd(s) => s.dim + upper_len(s.dim),
            Self::ExponentialFamily(s) => s.statistics.len(),
        }
    }

    fn check_code(&self, code: &QuantizationCode) -> Result<()> {
        if code.level == 0 {
            return Err(invalid("quantization level must be positive"));
        }
        let expected = self.code_len(code.level);
        if code.z.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: code.z.len() });
        }
        ensure_finite(&code.z, "quantization code")
    }

    /// The quantizer `Q_q`.
    pub fn quantize(&self, code: &QuantizationCode) -> Result<QasPoint> {
        self.check_code(code)?;
        let z = &code.z;
        match self {
            Self::WassersteinConvex(s) => Ok(QasPoint::Measure(DiscreteMeasure::uniform(s.dim, z.clone())?)),
            Self::AdaptedEmpirical(s) => {
                let cells = s.cells(code.level);
                let snapped: Vec<f64> = z.iter().map(|&x| s.snap(x, cells)).collect();
                let law = DiscreteMeasure::uniform(s.path_len(), snapped)?;
                Ok(QasPoint::Path(PathMeasure::new(s.dim, s.horizon, law)?))
            }
            Self::LinearSchauder(_) => Ok(QasPoint::Vector(z.clone())),
            Self::ForwardRateRkhs(s) => Ok(QasPoint::Vector(z[..z.len().min(s.knots.len())].to_vec())),
            Self::GaussianSpd(s) => {
                let cov = spd_exp(&sym_from_upper(s.dim, &z[s.dim..]))?;
                Ok(QasPoint::Gaussian(GaussianMeasure::new(z[..s.dim].to_vec(), cov)?))
            }
            Self::ExponentialFamily(_) => Ok(QasPoint::Vector(z.iter().map(|x| x.clamp(0.0, 1.0)).collect())),
        }
    }

    /// The mixing map `eta(w, Y)`. At a vertex `e_i` it returns `y_i`.
    pub fn mix(&self, w: &[f64], points: &[QasPoint]) -> Result<QasPoint> {
        if w.len() != points.len() || points.is_empty() {
            return Err(Error::DimensionMismatch { expected: points.len(), got: w.len() });
        }
        ensure_finite(w, "mixing weights")?;
        if w.iter().any(|&x| x < 0.0) || (w.iter().sum::<f64>() - 1.0).abs() > WEIGHT_TOL {
            return Err(invalid("mixing weights are not in the simplex"));
        }
        let mut nonzero = w.iter().enumerate().filter(|(_, &x)| x != 0.0);
        if let (Some((i, &wi)), None) = (nonzero.next(), nonzero.next()) {
            if wi == 1.0 {
                return Ok(points[i].clone());
            }
        }
        match self {
            Self::WassersteinConvex(s) => {
                let ms = points.iter().map(|p| self.expect_measure(p)).collect::<Result<Vec<_>>>()?;
                match s.mixer {
                    Mixer::Convex => Ok(QasPoint::Measure(DiscreteMeasure::mixture(w, &ms)?)),
                    Mixer::Barycenter => Ok(QasPoint::Measure(wasserstein2_barycenter_1d(w, &ms)?)),
                }
            }
            Self::AdaptedEmpirical(s) => {
                let ms = points
                    .iter()
                    .map(|p| p.as_path().map(PathMeasure::law).ok_or_else(|| invalid("expected a path measure")))
                    .collect::<Result<Vec<_>>>()?;
                Ok(QasPoint::Path(PathMeasure::new(s.dim, s.horizon, DiscreteMeasure::mixture(w, &ms)?)?))
            }
            Self::LinearSchauder(_) | Self::ForwardRateRkhs(_) | Self::ExponentialFamily(_) => {
                let vs = points.iter().map(|p| self.expect_vector(p)).collect::<Result<Vec<_>>>()?;
                let n = vs.iter().map(|v| v.len()).max().unwrap_or(0);
                let mut out = vec![0.0; n];
                for (&wi, v) in w.iter().zip(&vs) {
                    if wi == 0.0 {
                        continue;
                    }
                    for (o, x) in out.iter_mut().zip(v.iter()) {
                        *o += wi * x;
                    }
                }
                Ok(QasPoint::Vector(out))
            }
            Self::GaussianSpd(s) => {
                let d = s.dim;
                let mut mean = vec![0.0; d];
                let mut log_cov = DMatrix::zeros(d, d);
                for (&wi, p) in w.iter().zip(points) {
                    let g = p.as_gaussian().ok_or_else(|| invalid("expected a Gaussian"))?;
                    if g.dim() != d {
                        return Err(Error::DimensionMismatch { expected: d, got: g.dim() });
                    }
                    if wi == 0.0 {
                        continue;
                    }
                    for (m, x) in mean.iter_mut().zip(g.mean()) {
                        *m += wi * x;
                    }
                    log_cov += spd_log(g.cov())? * wi;
                }
                Ok(QasPoint::Gaussian(GaussianMeasure::new(mean, spd_exp(&log_cov)?)?))
            }
        }
    }

    fn expect_measure<'a>(&self, p: &'a QasPoint) -> Result<&'a DiscreteMeasure> {
        p.as_measure().ok_or_else(|| invalid("expected a discrete measure"))
    }

    fn expect_vector<'a>(&self, p: &'a QasPoint) -> Result<&'a [f64]> {
        p.as_vector().ok_or_else(|| invalid("expected a coefficient vector"))
    }

    /// The metric of the space.
    pub fn distance(&self, a: &QasPoint, b: &QasPoint) -> Result<f64> {
        match self {
            Self::WassersteinConvex(s) => wasserstein_p(self.expect_measure(a)?, self.expect_measure(b)?, s.p),
            Self::AdaptedEmpirical(s) => {
                let (x, y) = (a.as_path(), b.as_path());
                match (x, y) {
                    (Some(x), Some(y)) => adapted_wasserstein_p(x, y, s.p),
                    _ => Err(invalid("expected path measures")),
                }
            }
            Self::LinearSchauder(s) => {
                let diff = padded_diff(self.expect_vector(a)?, self.expect_vector(b)?);
                Ok(match s.basis {
                    SchauderBasis::Canonical => libm::sqrt(vector_norm_sq(&diff)),
                    SchauderBasis::FaberSchauder { grid } => (0..=grid)
                        .map(|g| {
                            let t = g as f64 / grid as f64;
                            diff.iter().enumerate().map(|(k, c)| c * faber_schauder(k, t)).sum::<f64>().abs()
                        })
                        .fold(0.0, f64::max),
                })
            }
            Self::ForwardRateRkhs(s) => {
                let (x, y) = (self.expect_vector(a)?, self.expect_vector(b)?);
                if x.len() > s.knots.len() || y.len() > s.knots.len() {
                    return Err(invalid("more coefficients than kernel knots"));
                }
                let diff = padded_diff(x, y);
                let mut q = 0.0;
                for (i, ci) in diff.iter().enumerate() {
                    for (j, cj) in diff.iter().enumerate() {
                        q += ci * cj * forward_rate_kernel(s.alpha, s.knots[i], s.knots[j]);
                    }
                }
                Ok(libm::sqrt(q.max(0.0)))
            }
            Self::GaussianSpd(_) => match (a.as_gaussian(), b.as_gaussian()) {
                (Some(x), Some(y)) => gaussian_distance(x, y),
                _ => Err(invalid("expected Gaussians")),
            },
            Self::ExponentialFamily(s) => {
                let (x, y) = (self.expect_vector(a)?, self.expect_vector(b)?);
                if x.len() != s.statistics.len() || y.len() != s.statistics.len() {
                    return Err(Error::DimensionMismatch { expected: s.statistics.len(), got: x.len().max(y.len()) });
                }
                Ok(libm::sqrt(vector_norm_sq(&padded_diff(x, y))))
            }
        }
    }

    /// `eta(P_Delta(u), (Q(z_n))_n)`.
    pub fn attention(&self, u: &[f64], codes: &[QuantizationCode]) -> Result<QasPoint> {
        let points = codes.iter().map(|c| self.quantize(c)).collect::<Result<Vec<_>>>()?;
        self.attention_points(u, &points)
    }

    /// Attention against already quantized codes.
    pub fn attention_points(&self, u: &[f64], points: &[QasPoint]) -> Result<QasPoint> {
        if u.len() != points.len() {
            return Err(Error::DimensionMismatch { expected: points.len(), got: u.len() });
        }
        self.mix(&project_simplex(u)?, points)
    }

    /// A level `q' > q` code with the same image. Linear and parametric
    /// spaces use `q' = q + 1`; uniform empirical measures need a multiple of
    /// `q` (and, for the adapted grid, a compatible refinement).
    pub fn nest(&self, code: &QuantizationCode) -> Result<QuantizationCode> {
        self.check_code(code)?;
        let q = code.level;
        Ok(match self {
            Self::WassersteinConvex(_) => {
                let mut z = code.z.clone();
                z.extend_from_slice(&code.z);
                QuantizationCode { level: 2 * q, z }
            }
            Self::AdaptedEmpirical(s) => {
                // A multiple of q whose grid splits every cell into an odd
                // number of cells per axis keeps the old centres as centres.
                let k = s.cells(q);
                let mult = (2..=1 << 20)
                    .find(|&m| {
                        let k2 = s.cells(q * m);
                        k2 % k == 0 && (k2 / k) % 2 == 1
                    })
                    .ok_or_else(|| Error::Numeric("no nested adapted grid found".into()))?;
                let snapped: Vec<f64> = code.z.iter().map(|&x| s.snap(x, k)).collect();
                let mut z = Vec::with_capacity(snapped.len() * mult);
                for _ in 0..mult {
                    z.extend_from_slice(&snapped);
                }
                QuantizationCode { level: q * mult, z }
            }
            Self::LinearSchauder(_) | Self::ForwardRateRkhs(_) => {
                let mut z = code.z.clone();
                z.push(0.0);
                QuantizationCode { level: q + 1, z }
            }
            Self::GaussianSpd(_) | Self::ExponentialFamily(_) => QuantizationCode { level: q + 1, z: code.z.clone() },
        })
    }

    pub fn describe(&self) -> alloc::string::String {
        match self {
            Self::WassersteinConvex(s) => format!("W{} on R^{}", s.p, s.dim),
            Self::AdaptedEmpirical(s) => format!("AW{} on paths in [0,1]^{} x {}", s.p, s.dim, s.horizon),
            Self::LinearSchauder(_) => "Schauder coefficients".into(),
            Self::ForwardRateRkhs(s) => format!("forward-rate RKHS alpha={}", s.alpha),
            Self::GaussianSpd(s) => format!("Gaussians on R^{}", s.dim),
            Self::ExponentialFamily(s) => format!("exponential family with {} statistics", s.statistics.len()),
        }
    }
}
