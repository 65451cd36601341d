use libm::{exp, floor, sin, cos, tanh, log1p};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Built-in scalar nonlinearities usable as `sigma*`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(tag = "name", rename_all = "snake_case"))]
pub enum ScalarFn {
    Sigmoid,
    Tanh,
    Relu,
    /// `max(x, slope x)`; the derivative at 0 is taken to be 1.
    LeakyRelu { slope: f64 },
    Softplus,
    Swish,
    Sin,
}

impl ScalarFn {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            Self::Sigmoid => sigmoid(x),
            Self::Tanh => tanh(x),
            Self::Relu => x.max(0.0),
            Self::LeakyRelu { slope } => {
                if x >= 0.0 {
                    x
                } else {
                    slope * x
                }
            }
            Self::Softplus => softplus(x),
            Self::Swish => x * sigmoid(x),
            Self::Sin => sin(x),
        }
    }

    pub fn derivative(self, x: f64) -> f64 {
        match self {
            Self::Sigmoid => {
                let s = sigmoid(x);
                s * (1.0 - s)
            }
            Self::Tanh => {
                let t = tanh(x);
                1.0 - t * t
            }
            Self::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Self::LeakyRelu { slope } => {
                if x >= 0.0 {
                    1.0
                } else {
                    slope
                }
            }
            Self::Softplus => sigmoid(x),
            Self::Swish => {
                let s = sigmoid(x);
                s + x * s * (1.0 - s)
            }
            Self::Sin => cos(x),
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + exp(-x))
    } else {
        let e = exp(x);
        e / (1.0 + e)
    }
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + log1p(exp(-x.abs()))
}

/// The three trainable activation families.
///
/// `Singular`: `a1 max(x, a2 x) + (1 - a1) floor(x)`.
/// `Smooth`: `a1 max(x, a2 x) + (1 - a1) sigma(x)` with `sigma` non-polynomial
/// (a caller contract; not checked).
/// `Classical`: `sigma(x)`, ignoring `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(tag = "kind", rename_all = "snake_case"))]
pub enum ActivationKind {
    Singular,
    Smooth { sigma: ScalarFn },
    Classical { sigma: ScalarFn },
}

impl ActivationKind {
    pub fn smooth() -> Self {
        Self::Smooth { sigma: ScalarFn::Sigmoid }
    }

    pub fn classical() -> Self {
        Self::Classical { sigma: ScalarFn::LeakyRelu { slope: 0.01 } }
    }

    pub fn is_gradient_trainable(&self) -> bool {
        !matches!(self, Self::Singular)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Singular => "singular",
            Self::Smooth { .. } => "smooth",
            Self::Classical { .. } => "classical",
        }
    }
}

fn leaky(alpha2: f64, x: f64) -> f64 {
    x.max(alpha2 * x)
}

pub fn activation_eval(kind: ActivationKind, alpha: [f64; 2], x: f64) -> f64 {
    match kind {
        ActivationKind::Singular => alpha[0] * leaky(alpha[1], x) + (1.0 - alpha[0]) * floor(x),
        ActivationKind::Smooth { sigma } => alpha[0] * leaky(alpha[1], x) + (1.0 - alpha[0]) * sigma.eval(x),
        ActivationKind::Classical { sigma } => sigma.eval(x),
    }
}

/// Partial derivatives `(d/dx, d/da1, d/da2)`. The floor branch contributes
/// zero to `d/dx`; `max` picks the `x` branch on ties.
pub fn activation_partials(kind: ActivationKind, alpha: [f64; 2], x: f64) -> (f64, f64, f64) {
    let (m, dm_dx, dm_da2) = if x >= alpha[1] * x { (x, 1.0, 0.0) } else { (alpha[1] * x, alpha[1], x) };
    match kind {
        ActivationKind::Singular => (alpha[0] * dm_dx, m - floor(x), alpha[0] * dm_da2),
        ActivationKind::Smooth { sigma } => (
            alpha[0] * dm_dx + (1.0 - alpha[0]) * sigma.derivative(x),
            m - sigma.eval(x),
            alpha[0] * dm_da2,
        ),
        ActivationKind::Classical { sigma } => (sigma.derivative(x), 0.0, 0.0),
    }
}
