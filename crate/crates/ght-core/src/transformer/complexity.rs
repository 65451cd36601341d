use libm::{ceil, exp, log, log2, pow, sqrt};
#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Activation column of the complexity tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "snake_case"))]
pub enum ActivationClass {
    Singular,
    Smooth,
    Classical,
}

/// What to do when the unspecified absolute constant `c` is missing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "snake_case"))]
pub enum ConstantPolicy {
    #[default]
    Strict,
    /// Substitute `c = 1` and flag the report.
    Permissive,
}

/// Inputs of the geometric transformer table. Quantities only used by one
/// column are optional.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(deny_unknown_fields))]
pub struct StaticInputs {
    pub n: usize,
    pub alpha: f64,
    pub lipschitz: f64,
    pub diam: f64,
    /// Metric capacity `kappa_X(1/5)` (an estimate).
    pub kappa: f64,
    pub c_eta: f64,
    pub c: Option<f64>,
    pub eps_a: f64,
    pub eps_q: f64,
    /// Width parameter of the singular column.
    pub w: Option<u64>,
    /// Implicit depth parameter; solved from `eps_a` when absent.
    pub d: Option<u64>,
    /// Target accuracy of the smooth column.
    pub eps_tilde: Option<f64>,
    /// Depth of the classical column (not given by the table).
    pub depth: Option<f64>,
}

/// Inputs of the feedforward table.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(deny_unknown_fields))]
pub struct FfnnInputs {
    pub n: usize,
    pub m: usize,
    pub alpha: f64,
    pub lipschitz: f64,
    pub diam: f64,
    pub kappa: f64,
    pub c: Option<f64>,
    /// Accuracy `eps` of the implicit relation.
    pub eps: f64,
    pub w: Option<u64>,
    pub d: Option<u64>,
    pub eps_tilde: Option<f64>,
    pub depth: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ComplexityReport {
    pub activation: ActivationClass,
    pub depth: Option<f64>,
    pub width: f64,
    pub params: Option<f64>,
    /// Number of codes `N` (static table only).
    pub n_codes: Option<f64>,
    pub ln_n: Option<f64>,
    /// Quantization level from the modulus hook.
    pub q: Option<usize>,
    pub implicit_d: Option<u64>,
    /// Input complexity constant `C_K` (feedforward table only).
    pub c_k: Option<f64>,
    pub c: Option<f64>,
    /// Set when `c` was filled in by the permissive policy.
    pub c_defaulted: bool,
}

fn positive(x: f64, name: &str) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(invalid(alloc::format!("{name} must be positive and finite")))
    }
}

fn resolve_c(c: Option<f64>, policy: ConstantPolicy) -> Result<(f64, bool)> {
    match (c, policy) {
        (Some(c), _) => {
            positive(c, "absolute constant c")?;
            Ok((c, false))
        }
        (None, ConstantPolicy::Strict) => Err(Error::Missing("absolute constant c".into())),
        (None, ConstantPolicy::Permissive) => Ok((1.0, true)),
    }
}

/// `x_{++} = max(1, x)`.
fn pp(x: f64) -> f64 {
    x.max(1.0)
}

/// Smallest `D >= 1` with `scale n^{alpha/2} W^{-sqrt D} (W^{(1-alpha) sqrt D} + 2) <= eps`.
pub fn solve_implicit_d(scale: f64, n: usize, alpha: f64, w: u64, eps: f64) -> Result<u64> {
    let f = |d: u64| {
        let s = sqrt(d as f64);
        let w = w as f64;
        scale * pow(n as f64, alpha / 2.0) * pow(w, -s) * (pow(w, (1.0 - alpha) * s) + 2.0)
    };
    if f(1) <= eps {
        return Ok(1);
    }
    if w < 2 {
        return Err(Error::Domain("the implicit relation has no solution for W < 2".into()));
    }
    let mut hi = 2u64;
    while f(hi) > eps {
        if hi > 1 << 40 {
            return Err(Error::Domain("implicit depth parameter out of range".into()));
        }
        hi *= 2;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if f(mid) <= eps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// The bracketed exponent of the `ln N` row.
pub fn ln_codes(alpha: f64, lipschitz: f64, diam: f64, kappa: f64, c_eta: f64, c: f64, eps_a: f64) -> f64 {
    let log_kappa = log2(kappa);
    let inner = log2(diam) - log2(eps_a / (3.0 * lipschitz))
        + log2(pp(c_eta * 2.0 * c * ceil(1.0 / alpha) * log_kappa));
    log(kappa) * ceil(inner / alpha)
}

fn smooth_factor(eps_tilde: f64, lipschitz: f64, n: usize, alpha: f64, k: f64) -> f64 {
    let e = k * n as f64 / alpha;
    pow(eps_tilde, -e) * pow(lipschitz, e) * pow(1.0 + n as f64 / 4.0, e)
}

/// Geometric transformer table. `modulus` maps `eps_q` to a level `q`.
pub fn complexity_static(
    kind: ActivationClass,
    inp: &StaticInputs,
    policy: ConstantPolicy,
    modulus: Option<&dyn Fn(f64) -> Result<usize>>,
) -> Result<ComplexityReport> {
    if !(inp.alpha > 0.0 && inp.alpha <= 1.0) {
        return Err(invalid("alpha must lie in (0, 1]"));
    }
    for (v, name) in [
        (inp.lipschitz, "L_f"),
        (inp.diam, "diam"),
        (inp.kappa, "kappa"),
        (inp.c_eta, "C_eta"),
        (inp.eps_a, "eps_A"),
        (inp.eps_q, "eps_Q"),
    ] {
        positive(v, name)?;
    }
    if inp.n == 0 {
        return Err(invalid("input dimension must be positive"));
    }
    let (c, c_defaulted) = resolve_c(inp.c, policy)?;
    let ln_n = ln_codes(inp.alpha, inp.lipschitz, inp.diam, inp.kappa, inp.c_eta, c, inp.eps_a);
    let raw = exp(ln_n);
    let big_n = ceil(raw * (1.0 - 1e-12)).max(1.0);
    let q = modulus.map(|m| m(inp.eps_q)).transpose()?;
    let n = inp.n as f64;
    let nm1 = big_n - 1.0;
    let (depth, width, params, implicit_d) = match kind {
        ActivationClass::Singular => {
            let w = inp.w.ok_or_else(|| Error::Missing("width parameter W".into()))?;
            let d = match inp.d {
                Some(d) => d,
                None => solve_implicit_d(sqrt(big_n), inp.n, inp.alpha, w, inp.eps_a)?,
            };
            let (wf, df) = (w as f64, d as f64);
            let depth = nm1 * (1.0 + (64.0 * n * df + 3.0));
            let width = n * (big_n - 2.0) + n.max(5.0 * wf + 13.0);
            let m = (n + 3.0).max(5.0 * wf + 16.0);
            let params = (11.0 / 4.0 * n * n * nm1 * nm1 - 1.0) * nm1 * m * m * (64.0 * n * df + 4.0);
            (Some(depth), width, Some(params), Some(d))
        }
        ActivationClass::Smooth => {
            let e = inp.eps_tilde.ok_or_else(|| Error::Missing("accuracy eps_tilde".into()))?;
            positive(e, "eps_tilde")?;
            let depth = nm1 * (1.0 + smooth_factor(e, inp.lipschitz, inp.n, inp.alpha, 2.0));
            let width = n * nm1 + 3.0;
            let params = (11.0 / 4.0 * n * n * nm1 * nm1 - 1.0)
                * nm1
                * (n + 6.0)
                * (n + 6.0)
                * (smooth_factor(e, inp.lipschitz, inp.n, inp.alpha, 4.0) + 1.0);
            (Some(depth), width, Some(params), None)
        }
        ActivationClass::Classical => {
            let width = big_n + n + 1.0;
            let params = inp.depth.map(|d| width * width * (d + 1.0));
            (inp.depth, width, params, None)
        }
    };
    Ok(ComplexityReport {
        activation: kind,
        depth,
        width,
        params,
        n_codes: Some(big_n),
        ln_n: Some(ln_n),
        q,
        implicit_d,
        c_k: None,
        c: Some(c),
        c_defaulted,
    })
}

/// `C_K = c sqrt(m) ceil(1/alpha) log2(kappa_K(1/5)) diam(K)^alpha`.
pub fn input_complexity_constant(c: f64, m: usize, alpha: f64, kappa: f64, diam: f64) -> f64 {
    c * sqrt(m as f64) * ceil(1.0 / alpha) * log2(kappa) * pow(diam, alpha)
}

/// Feedforward table.
pub fn complexity_ffnn(kind: ActivationClass, inp: &FfnnInputs, policy: ConstantPolicy) -> Result<ComplexityReport> {
    if !(inp.alpha > 0.0 && inp.alpha <= 1.0) {
        return Err(invalid("alpha must lie in (0, 1]"));
    }
    for (v, name) in [(inp.lipschitz, "L_f"), (inp.diam, "diam"), (inp.kappa, "kappa"), (inp.eps, "eps")] {
        positive(v, name)?;
    }
    if inp.n == 0 || inp.m == 0 {
        return Err(invalid("input and output dimensions must be positive"));
    }
    let (c, c_defaulted) = resolve_c(inp.c, policy)?;
    let (n, m) = (inp.n as f64, inp.m as f64);
    let (depth, width, params, implicit_d) = match kind {
        ActivationClass::Singular => {
            let w = inp.w.ok_or_else(|| Error::Missing("width parameter W".into()))?;
            let d = match inp.d {
                Some(d) => d,
                None => solve_implicit_d(1.0, inp.n, inp.alpha, w, inp.eps)?,
            };
            let (wf, df) = (w as f64, d as f64);
            let depth = m * (1.0 + (64.0 * n * df + 3.0));
            let width = n * (m - 1.0) + n.max(5.0 * wf + 13.0);
            let mm = (n + 3.0).max(5.0 * wf + 16.0);
            let params = (11.0 / 4.0 * n * n * m * m - 1.0) * m * mm * mm * (64.0 * n * df + 4.0);
            (Some(depth), width, Some(params), Some(d))
        }
        ActivationClass::Smooth => {
            let e = inp.eps_tilde.ok_or_else(|| Error::Missing("accuracy eps_tilde".into()))?;
            positive(e, "eps_tilde")?;
            let depth = m * (1.0 + smooth_factor(e, inp.lipschitz, inp.n, inp.alpha, 2.0));
            let width = n * m + 3.0;
            let params = (11.0 / 4.0 * n * n * m * m - 1.0)
                * m
                * (n + 6.0)
                * (n + 6.0)
                * (smooth_factor(e, inp.lipschitz, inp.n, inp.alpha, 4.0) + 1.0);
            (Some(depth), width, Some(params), None)
        }
        ActivationClass::Classical => {
            let width = n + m + 2.0;
            let params = inp.depth.map(|d| width * width * (d + 1.0));
            (inp.depth, width, params, None)
        }
    };
    Ok(ComplexityReport {
        activation: kind,
        depth,
        width,
        params,
        n_codes: None,
        ln_n: None,
        q: None,
        implicit_d,
        c_k: Some(input_complexity_constant(c, inp.m, inp.alpha, inp.kappa, inp.diam)),
        c: Some(c),
        c_defaulted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> StaticInputs {
        StaticInputs {
            n: 2,
            alpha: 1.0,
            lipschitz: 1.0,
            diam: 1.0,
            kappa: 8.0,
            c_eta: 1.0,
            c: Some(1.0),
            eps_a: 0.01,
            eps_q: 0.1,
            w: Some(4),
            d: Some(3),
            eps_tilde: Some(0.5),
            depth: Some(5.0),
        }
    }

    #[test]
    fn strict_mode_names_the_constant() {
        let inp = StaticInputs { c: None, ..base() };
        let err = complexity_static(ActivationClass::Classical, &inp, ConstantPolicy::Strict, None).unwrap_err();
        assert!(alloc::format!("{err}").contains("absolute constant c"));
        let r = complexity_static(ActivationClass::Classical, &inp, ConstantPolicy::Permissive, None).unwrap();
        assert!(r.c_defaulted);
        assert_eq!(r.c, Some(1.0));
    }

    #[test]
    fn classical_parameter_cell() {
        let r = complexity_static(ActivationClass::Classical, &base(), ConstantPolicy::Strict, None).unwrap();
        let n = r.n_codes.unwrap();
        assert_eq!(r.params.unwrap(), (n + 2.0 + 1.0) * (n + 2.0 + 1.0) * 6.0);
    }

    #[test]
    fn halving_eps_a_moves_ln_n_in_kappa_steps() {
        let k = 8.0f64;
        let a = complexity_static(ActivationClass::Classical, &base(), ConstantPolicy::Strict, None).unwrap();
        let b = complexity_static(
            ActivationClass::Classical,
            &StaticInputs { eps_a: 0.005, ..base() },
            ConstantPolicy::Strict,
            None,
        )
        .unwrap();
        let steps = (b.ln_n.unwrap() - a.ln_n.unwrap()) / libm::log(k);
        assert!((steps - libm::round(steps)).abs() < 1e-12 && steps >= 1.0 - 1e-12);
    }

    #[test]
    fn singular_ffnn_depth_cell() {
        let inp = FfnnInputs {
            n: 3,
            m: 2,
            alpha: 1.0,
            lipschitz: 1.0,
            diam: 1.0,
            kappa: 4.0,
            c: Some(1.0),
            eps: 0.1,
            w: Some(3),
            d: Some(5),
            eps_tilde: None,
            depth: None,
        };
        let r = complexity_ffnn(ActivationClass::Singular, &inp, ConstantPolicy::Strict).unwrap();
        assert_eq!(r.depth.unwrap(), 2.0 * (1.0 + (64.0 * 3.0 * 5.0 + 3.0)));
    }

    #[test]
    fn implicit_d_is_minimal() {
        for (w, eps) in [(2u64, 0.5), (4, 0.01), (10, 1e-4)] {
            let d = solve_implicit_d(1.0, 2, 0.5, w, eps).unwrap();
            let f = |d: u64| {
                let s = libm::sqrt(d as f64);
                libm::pow(2.0, 0.25) * libm::pow(w as f64, -s) * (libm::pow(w as f64, 0.5 * s) + 2.0)
            };
            assert!(f(d) <= eps);
            assert!(d == 1 || f(d - 1) > eps);
        }
    }
}
