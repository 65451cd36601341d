use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use libm::{log, sqrt};

use super::maps::FiniteComplexityMap;
use crate::error::{invalid, Error, Result};
use crate::metric::{DiscreteMeasure, PathMeasure};
use crate::qas::QasPoint;

/// `(t, x) -> R^k`.
pub type VecField = Arc<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>;
/// `(t, x) -> R` for scalar state.
pub type ScalarField = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

const MAX_ATOMS: usize = 1 << 20;

fn poly(c: &[f64], r: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * r + a)
}

/// Standard normal quantile (Wichura's AS 241, about 16 digits).
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain("normal quantile needs p in (0, 1)".into()));
    }
    const A: [f64; 8] = [
        3.387_132_872_796_366_608,
        133.141_667_891_784_377_45,
        1_971.590_950_306_551_442_7,
        13_731.693_765_509_461_125,
        45_921.953_931_549_871_457,
        67_265.770_927_008_700_853,
        33_430.575_583_588_128_105,
        2_509.080_928_730_122_672_7,
    ];
    const B: [f64; 8] = [
        1.0,
        42.313_330_701_600_911_252,
        687.187_007_492_057_908_3,
        5_394.196_021_424_751_107_7,
        21_213.794_301_586_595_867,
        39_307.895_800_092_710_61,
        28_729.085_735_721_942_674,
        5_226.495_278_852_854_561,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_577_34,
        4.630_337_846_156_545_295_9,
        5.769_497_221_460_691_405_5,
        3.647_848_324_763_204_605_04,
        1.270_458_252_452_368_382_58,
        0.241_780_725_177_450_611_77,
        0.022_723_844_989_269_184_583_3,
        7.745_450_142_783_414_076_4e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.053_191_626_637_758_821_87,
        1.676_384_830_183_803_849_4,
        0.689_767_334_985_100_004_55,
        0.148_103_976_427_480_074_59,
        0.015_198_666_563_616_457_196_6,
        5.475_938_084_995_344_946e-4,
        1.050_750_071_644_416_843_24e-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103_777_2,
        5.463_784_911_164_114_369_9,
        1.784_826_539_917_291_335_8,
        0.296_560_571_828_504_891_23,
        0.026_532_189_526_576_123_093,
        1.242_660_947_388_078_438_6e-3,
        2.711_555_568_743_487_578_15e-5,
        2.010_334_399_292_288_132_65e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        0.599_832_206_555_887_937_69,
        0.136_929_880_922_735_805_31,
        0.014_875_361_290_850_614_852_5,
        7.868_691_311_456_132_591e-4,
        1.846_318_317_510_054_681_8e-5,
        1.421_511_758_316_445_888_7e-7,
        2.044_263_103_389_939_785_64e-15,
    ];
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return Ok(q * poly(&A, r) / poly(&B, r));
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = sqrt(-log(tail));
    let v = if r <= 5.0 {
        r -= 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        r -= 5.0;
        poly(&E, r) / poly(&F, r)
    };
    Ok(if q < 0.0 { -v } else { v })
}

/// `Phi^{-1}((2i - 1) / (2k))` for `i = 1..=k`, exactly antisymmetric.
pub fn gaussian_mid_quantiles(k: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(invalid("quantile count must be positive"));
    }
    let mut z = vec![0.0; k];
    for i in 0..k / 2 {
        let v = normal_quantile((2 * i + 1) as f64 / (2 * k) as f64)?;
        z[i] = v;
        z[k - 1 - i] = -v;
    }
    Ok(z)
}

/// `k^d`-point discretization of `N(mean, s s^T)`: atoms `mean + s z` over
/// the product grid of mid-quantiles, uniform weights.
pub fn gaussian_discretization(mean: &[f64], s: &[f64], k: usize) -> Result<DiscreteMeasure> {
    let d = mean.len();
    if d == 0 || s.len() != d * d {
        return Err(Error::DimensionMismatch { expected: d * d, got: s.len() });
    }
    let count = k.checked_pow(d as u32).filter(|&c| c <= MAX_ATOMS).ok_or_else(|| invalid("quantile grid too large"))?;
    let z = gaussian_mid_quantiles(k)?;
    let mut atoms = Vec::with_capacity(count * d);
    let mut idx = vec![0usize; d];
    for _ in 0..count {
        for i in 0..d {
            let mut v = mean[i];
            for j in 0..d {
                v += s[i * d + j] * z[idx[j]];
            }
            atoms.push(v);
        }
        for slot in idx.iter_mut().rev() {
            *slot += 1;
            if *slot < k {
                break;
            }
            *slot = 0;
        }
    }
    DiscreteMeasure::new(d, atoms, vec![1.0 / count as f64; count])
}

/// Law of `X + Z` for independent `X ~ a`, `Z ~ b`.
pub fn convolve(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Result<DiscreteMeasure> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    if a.len().saturating_mul(b.len()) > MAX_ATOMS {
        return Err(invalid("convolution too large"));
    }
    let d = a.dim();
    let mut atoms = Vec::with_capacity(a.len() * b.len() * d);
    let mut weights = Vec::with_capacity(a.len() * b.len());
    for (x, wx) in a.iter() {
        for (y, wy) in b.iter() {
            atoms.extend(x.iter().zip(y).map(|(u, v)| u + v));
            weights.push(wx * wy);
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    DiscreteMeasure::new(d, atoms, weights)
}

/// Conditional law of one step `x + delta mu + sqrt(delta) sigma W + Z` as a
/// memory-0 map: `f(t, x) = (x + delta mu(t, x), sqrt(delta) sigma(t, x))`
/// and `rho(m, s)` = discretized `N(m, s s^T)` convolved with `nu`.
pub fn sde_kernel_map(
    mu: VecField,
    sigma: VecField,
    delta: f64,
    nu: DiscreteMeasure,
    k: usize,
) -> Result<FiniteComplexityMap> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(invalid("delta must be positive"));
    }
    if k == 0 {
        return Err(invalid("quantile count must be positive"));
    }
    let d = nu.dim();
    let root = sqrt(delta);
    let encoder = Arc::new(move |t: f64, x: &[f64]| -> Result<Vec<f64>> {
        let m = mu(t, x);
        let s = sigma(t, x);
        if m.len() != d || s.len() != d * d {
            return Err(Error::DimensionMismatch { expected: d + d * d, got: m.len() + s.len() });
        }
        let mut out: Vec<f64> = x.iter().zip(&m).map(|(a, b)| a + delta * b).collect();
        out.extend(s.iter().map(|v| root * v));
        Ok(out)
    });
    let decoder = Arc::new(move |u: &[f64]| -> Result<QasPoint> {
        if u.len() != d + d * d {
            return Err(Error::DimensionMismatch { expected: d + d * d, got: u.len() });
        }
        let g = gaussian_discretization(&u[..d], &u[d..], k)?;
        Ok(QasPoint::Measure(convolve(&g, &nu)?))
    });
    Ok(FiniteComplexityMap::new(0, d, d + d * d, encoder, decoder)?.homogeneous(false))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwoStepConfig {
    /// Number `m` of interior quantiles `q_1 < ... < q_m`.
    pub quantiles: usize,
    /// Atoms used for each second-step Gaussian.
    pub step_atoms: usize,
}

/// Two-step conditional law of a scalar SDE on a unit grid, as a memory-0
/// map into path measures of horizon 2.
///
/// `q_k = Phi^{-1}(k / (m + 1))` cut the line into cells `I_0..I_m` of equal
/// mass. The encoder emits
/// `(x + mu(t, x), sigma(t, x), (mu_k)_{k=1..m}, (sigma_k)_{k=1..m})` with
/// `y_k = x + mu(t, x) + sigma(t, x) q_k`, `mu_k = y_k + mu(t + 1, y_k)` and
/// `sigma_k = sigma(t + 1, y_k)`. The decoder places one first-step atom per
/// cell (its conditional median) followed by `N(mu_{k v 1}, sigma_{k v 1}^2)`.
pub fn sde_two_step_adapted(mu: ScalarField, sigma: ScalarField, cfg: TwoStepConfig) -> Result<FiniteComplexityMap> {
    let m = cfg.quantiles;
    if m == 0 || cfg.step_atoms == 0 {
        return Err(invalid("two-step map needs m >= 1 quantiles and at least one step atom"));
    }
    let q: Vec<f64> = (1..=m).map(|k| normal_quantile(k as f64 / (m + 1) as f64)).collect::<Result<_>>()?;
    let reps = gaussian_mid_quantiles(m + 1)?;
    let z = gaussian_mid_quantiles(cfg.step_atoms)?;
    let latent = 2 * (m + 1);
    let encoder = Arc::new(move |t: f64, x: &[f64]| -> Result<Vec<f64>> {
        if x.len() != 1 {
            return Err(Error::Unsupported("the two-step adapted map is scalar".into()));
        }
        let x = x[0];
        let m0 = x + mu(t, x);
        let s0 = sigma(t, x);
        let mut out = vec![m0, s0];
        let ys: Vec<f64> = q.iter().map(|qk| m0 + s0 * qk).collect();
        out.extend(ys.iter().map(|&y| y + mu(t + 1.0, y)));
        out.extend(ys.iter().map(|&y| sigma(t + 1.0, y)));
        Ok(out)
    });
    let decoder = Arc::new(move |u: &[f64]| -> Result<QasPoint> {
        if u.len() != latent {
            return Err(Error::DimensionMismatch { expected: latent, got: u.len() });
        }
        let (m0, s0) = (u[0], u[1]);
        let means = &u[2..2 + m];
        let sigmas = &u[2 + m..];
        let mut paths = Vec::with_capacity((m + 1) * z.len());
        for (cell, rep) in reps.iter().enumerate() {
            let j = cell.max(1) - 1;
            let x1 = m0 + s0 * rep;
            for zi in &z {
                paths.push(vec![x1, means[j] + sigmas[j] * zi]);
            }
        }
        let w = 1.0 / paths.len() as f64;
        let count = paths.len();
        Ok(QasPoint::Path(PathMeasure::from_paths(1, 2, &paths, vec![w; count])?))
    });
    Ok(FiniteComplexityMap::new(0, 1, latent, encoder, decoder)?)
}

#[derive(Debug, Clone)]
pub struct TruncatedMap {
    pub map: FiniteComplexityMap,
    /// Caller-certified bound on `sum_{n < -m} |k_n|`; the mean of the
    /// truncated kernel is within this distance (sup norm) of the full one.
    pub tail: f64,
    pub eps: f64,
}

/// `f_eps(t, x_{-m..0}) = (x_0 + sum_{n=-m}^0 k_n M(t, x_n), Sigma(t, x_0))`
/// and `rho_eps(mu, Sigma)` = discretized `N(mu, Sigma Sigma^T)`.
/// `M` must take values in `[0, 1]^d`.
pub fn infinite_memory_truncation(
    drift: VecField,
    vol: VecField,
    kernel: Arc<dyn Fn(i64) -> f64 + Send + Sync>,
    dim: usize,
    eps: f64,
    memory: usize,
    tail_bound: Option<f64>,
    k: usize,
) -> Result<TruncatedMap> {
    let tail = tail_bound.ok_or_else(|| Error::Domain("a certified kernel tail bound is required".into()))?;
    if !(tail >= 0.0 && tail.is_finite()) {
        return Err(Error::Domain("kernel tail bound must be finite and nonnegative".into()));
    }
    if !(eps > 0.0) || dim == 0 || k == 0 {
        return Err(invalid("truncation needs eps > 0, d >= 1 and k >= 1"));
    }
    let encoder = Arc::new(move |t: f64, seg: &[f64]| -> Result<Vec<f64>> {
        let x0 = &seg[memory * dim..];
        let mut mean = x0.to_vec();
        for j in 0..=memory {
            let n = j as i64 - memory as i64;
            let mv = drift(t, &seg[j * dim..(j + 1) * dim]);
            if mv.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: mv.len() });
            }
            if mv.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::Domain("drift field must take values in [0, 1]^d".into()));
            }
            let kn = kernel(n);
            for (m, v) in mean.iter_mut().zip(&mv) {
                *m += kn * v;
            }
        }
        let s = vol(t, x0);
        if s.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: s.len() });
        }
        mean.extend(s);
        Ok(mean)
    });
    let decoder = Arc::new(move |u: &[f64]| -> Result<QasPoint> {
        if u.len() != dim + dim * dim {
            return Err(Error::DimensionMismatch { expected: dim + dim * dim, got: u.len() });
        }
        Ok(QasPoint::Measure(gaussian_discretization(&u[..dim], &u[dim..], k)?))
    });
    let map = FiniteComplexityMap::new(memory, dim, dim + dim * dim, encoder, decoder)?;
    Ok(TruncatedMap { map, tail, eps })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_symmetry_and_centre() {
        assert_eq!(normal_quantile(0.5).unwrap(), 0.0);
        let z = gaussian_mid_quantiles(5).unwrap();
        assert_eq!(z[2], 0.0);
        assert_eq!(z[0], -z[4]);
        assert!((normal_quantile(0.975).unwrap() - 1.959_963_984_540_054).abs() < 1e-14);
        assert!((normal_quantile(1e-10).unwrap() + 6.361_340_902_404_056).abs() < 1e-12);
    }

    #[test]
    fn discretization_has_exact_mean() {
        let g = gaussian_discretization(&[1.5], &[2.0], 6).unwrap();
        let mean: f64 = g.iter().map(|(a, w)| a[0] * w).sum();
        assert!((mean - 1.5).abs() < 1e-14);
    }

    #[test]
    fn dirac_noise_shifts_atoms() {
        let g = gaussian_discretization(&[0.0], &[1.0], 4).unwrap();
        let shifted = convolve(&g, &DiscreteMeasure::dirac(&[3.0]).unwrap()).unwrap();
        assert_eq!(shifted, g.translate(&[3.0]).unwrap());
    }

    #[test]
    fn singular_sigma_collapses() {
        let g = gaussian_discretization(&[1.0, 2.0], &[0.0; 4], 3).unwrap();
        assert_eq!((g.len(), g.atom(0)), (1, &[1.0, 2.0][..]));
        assert!((g.weight(0) - 1.0).abs() < 1e-15);
    }
}
