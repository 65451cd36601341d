use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{ensure_finite, invalid, Error, Result};

/// Non-degenerate Gaussian law `N(mean, cov)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMeasure {
    mean: Vec<f64>,
    cov: DMatrix<f64>,
}

/// Symmetric eigendecomposition `(eigenvalues, eigenvectors)`.
pub fn sym_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let sym = (m + m.transpose()) * 0.5;
    let e = sym.symmetric_eigen();
    (e.eigenvalues, e.eigenvectors)
}

fn spectral(vals: &DVector<f64>, vecs: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let d = DMatrix::from_diagonal(&vals.map(f));
    let out = vecs * d * vecs.transpose();
    (&out + out.transpose()) * 0.5
}

fn check_spd(cov: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    if !cov.is_square() || cov.nrows() == 0 {
        return Err(invalid("covariance must be a non-empty square matrix"));
    }
    ensure_finite(cov.as_slice(), "covariance")?;
    let scale = cov.amax().max(1.0);
    if (cov - cov.transpose()).amax() > 1e-10 * scale {
        return Err(Error::NotSpd);
    }
    let (vals, vecs) = sym_eigen(cov);
    if vals.iter().any(|&l| l <= 0.0) {
        return Err(Error::NotSpd);
    }
    Ok((vals, vecs))
}

/// Matrix logarithm of an SPD matrix.
pub fn spd_log(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (vals, vecs) = check_spd(m)?;
    Ok(spectral(&vals, &vecs, libm::log))
}

/// Matrix exponential of a symmetric matrix.
pub fn spd_exp(s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !s.is_square() {
        return Err(invalid("matrix exponential needs a square matrix"));
    }
    ensure_finite(s.as_slice(), "symmetric matrix")?;
    let (vals, vecs) = sym_eigen(s);
    Ok(spectral(&vals, &vecs, libm::exp))
}

impl GaussianMeasure {
    pub fn new(mean: Vec<f64>, cov: DMatrix<f64>) -> Result<Self> {
        ensure_finite(&mean, "Gaussian mean")?;
        if cov.nrows() != mean.len() {
            return Err(Error::DimensionMismatch { expected: mean.len(), got: cov.nrows() });
        }
        check_spd(&cov)?;
        Ok(Self { mean, cov })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }
}

/// `sqrt(|m1 - m2|^2 + |log(S1^{-1/2} S2 S1^{-1/2})|_F^2)`.
///
/// The covariance part is the affine-invariant distance on SPD matrices.
/// Eigenvalues of the whitened matrix are clamped at `1e-14` times the
/// largest one.
pub fn gaussian_distance(a: &GaussianMeasure, b: &GaussianMeasure) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    if a == b {
        return Ok(0.0);
    }
    let mean_sq: f64 = a.mean.iter().zip(&b.mean).map(|(x, y)| (x - y) * (x - y)).sum();
    let (vals, vecs) = check_spd(&a.cov)?;
    let inv_sqrt = spectral(&vals, &vecs, |l| 1.0 / libm::sqrt(l));
    let whitened = &inv_sqrt * &b.cov * &inv_sqrt;
    let (mu, _) = sym_eigen(&whitened);
    let top = mu.max();
    if !(top > 0.0) {
        return Err(Error::NotSpd);
    }
    let floor = 1e-14 * top;
    let log_sq: f64 = mu.iter().map(|&l| { let g = libm::log(l.max(floor)); g * g }).sum();
    Ok(libm::sqrt(mean_sq + log_sq))
}
