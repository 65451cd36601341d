use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use super::activation::{activation_eval, activation_partials, ActivationKind};
use super::index::{decode, encode, Decomposed, HiddenLayer, MultiIndex};
use crate::error::{ensure_finite, Error, Result};

/// A feedforward network: widths, activation family and flat parameters.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(deny_unknown_fields))]
pub struct Network {
    pub dims: MultiIndex,
    pub activation: ActivationKind,
    pub theta: Vec<f64>,
}

/// Intermediate values of a forward pass: `pre[j]` are the affine outputs of
/// hidden layer `j`, `post[j]` its inputs (`post[0]` is the network input).
#[derive(Debug, Clone)]
pub struct Trace {
    pub pre: Vec<Vec<f64>>,
    pub post: Vec<Vec<f64>>,
    pub output: Vec<f64>,
}

fn affine(a: &[f64], b: &[f64], x: &[f64], out: &mut Vec<f64>) {
    out.clear();
    let cols = x.len();
    for (i, bi) in b.iter().enumerate() {
        let row = &a[i * cols..(i + 1) * cols];
        let mut s = 0.0;
        for (w, v) in row.iter().zip(x) {
            s += w * v;
        }
        out.push(s + bi);
    }
}

impl Network {
    pub fn new(dims: MultiIndex, activation: ActivationKind, theta: Vec<f64>) -> Result<Self> {
        let p = dims.param_count();
        if theta.len() != p {
            return Err(Error::DimensionMismatch { expected: p, got: theta.len() });
        }
        ensure_finite(&theta, "network parameters")?;
        Ok(Self { dims, activation, theta })
    }

    pub fn zeros(dims: MultiIndex, activation: ActivationKind) -> Self {
        let theta = vec![0.0; dims.param_count()];
        Self { dims, activation, theta }
    }

    pub fn from_parts(dims: MultiIndex, activation: ActivationKind, parts: &Decomposed) -> Result<Self> {
        let theta = encode(&dims, parts)?;
        Self::new(dims, activation, theta)
    }

    pub fn parts(&self) -> Decomposed {
        decode(&self.dims, &self.theta).expect("theta length is an invariant")
    }

    pub fn input_dim(&self) -> usize {
        self.dims.input()
    }

    pub fn output_dim(&self) -> usize {
        self.dims.output()
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dims.input() {
            return Err(Error::DimensionMismatch { expected: self.dims.input(), got: x.len() });
        }
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        for o in self.dims.hidden_offsets() {
            let th = &self.theta;
            affine(&th[o.a..o.b], &th[o.b..o.alpha], &cur, &mut next);
            for (i, z) in next.iter_mut().enumerate() {
                let al = [th[o.alpha + 2 * i], th[o.alpha + 2 * i + 1]];
                *z = activation_eval(self.activation, al, *z);
            }
            core::mem::swap(&mut cur, &mut next);
        }
        let r = self.dims.readout_offsets();
        affine(&self.theta[r.a..r.c], &self.theta[r.c..], &cur, &mut next);
        Ok(next)
    }

    pub fn trace(&self, x: &[f64]) -> Result<Trace> {
        if x.len() != self.dims.input() {
            return Err(Error::DimensionMismatch { expected: self.dims.input(), got: x.len() });
        }
        let mut pre = Vec::with_capacity(self.dims.depth());
        let mut post = vec![x.to_vec()];
        for o in self.dims.hidden_offsets() {
            let th = &self.theta;
            let mut z = Vec::new();
            affine(&th[o.a..o.b], &th[o.b..o.alpha], post.last().unwrap(), &mut z);
            let act = z
                .iter()
                .enumerate()
                .map(|(i, &v)| activation_eval(self.activation, [th[o.alpha + 2 * i], th[o.alpha + 2 * i + 1]], v))
                .collect();
            pre.push(z);
            post.push(act);
        }
        let r = self.dims.readout_offsets();
        let mut output = Vec::new();
        affine(&self.theta[r.a..r.c], &self.theta[r.c..], post.last().unwrap(), &mut output);
        Ok(Trace { pre, post, output })
    }

    /// Accumulates `J^T g` into `grad` (length `P`) for the pass in `trace`
    /// and returns the gradient with respect to the input.
    pub fn backprop(&self, trace: &Trace, g_out: &[f64], grad: &mut [f64]) -> Result<Vec<f64>> {
        if g_out.len() != self.dims.output() {
            return Err(Error::DimensionMismatch { expected: self.dims.output(), got: g_out.len() });
        }
        if grad.len() != self.theta.len() {
            return Err(Error::DimensionMismatch { expected: self.theta.len(), got: grad.len() });
        }
        let th = &self.theta;
        let r = self.dims.readout_offsets();
        let x_last = trace.post.last().unwrap();
        for (i, &g) in g_out.iter().enumerate() {
            grad[r.c + i] += g;
            for (k, &v) in x_last.iter().enumerate() {
                grad[r.a + i * r.cols + k] += g * v;
            }
        }
        let mut g_x = transpose_mul(&th[r.a..r.c], r.rows, r.cols, g_out);
        let offsets = self.dims.hidden_offsets();
        for (j, o) in offsets.iter().enumerate().rev() {
            let z = &trace.pre[j];
            let x_in = &trace.post[j];
            let mut g_z = vec![0.0; o.rows];
            for i in 0..o.rows {
                let al = [th[o.alpha + 2 * i], th[o.alpha + 2 * i + 1]];
                let (dx, da1, da2) = activation_partials(self.activation, al, z[i]);
                g_z[i] = g_x[i] * dx;
                grad[o.alpha + 2 * i] += g_x[i] * da1;
                grad[o.alpha + 2 * i + 1] += g_x[i] * da2;
                grad[o.b + i] += g_z[i];
                for (k, &v) in x_in.iter().enumerate() {
                    grad[o.a + i * o.cols + k] += g_z[i] * v;
                }
            }
            g_x = transpose_mul(&th[o.a..o.b], o.rows, o.cols, &g_z);
        }
        Ok(g_x)
    }

    /// Inserts `extra` identity layers (`A = I`, `b = 0`, `alpha = (1, 1)`)
    /// before the readout. The represented function is unchanged.
    pub fn pad_depth(&self, extra: usize) -> Result<Self> {
        if extra == 0 {
            return Ok(self.clone());
        }
        if matches!(self.activation, ActivationKind::Classical { .. }) {
            return Err(Error::Unsupported("classical activations have no identity parameter".into()));
        }
        let mut parts = self.parts();
        let width = self.dims.dims()[self.dims.depth()];
        for _ in 0..extra {
            let mut a = vec![0.0; width * width];
            for i in 0..width {
                a[i * width + i] = 1.0;
            }
            parts.hidden.push(HiddenLayer { a, b: vec![0.0; width], alpha: vec![[1.0, 1.0]; width] });
        }
        let mut dims = self.dims.dims().to_vec();
        let out = dims.pop().unwrap();
        dims.extend(core::iter::repeat_n(width, extra));
        dims.push(out);
        Self::from_parts(MultiIndex::new(dims)?, self.activation, &parts)
    }

    /// Appends inactive neurons (zero in- and out-weights) so hidden layer
    /// widths become `widths`. Outputs are unchanged.
    pub fn widen(&self, widths: &[usize]) -> Result<Self> {
        let depth = self.dims.depth();
        if widths.len() != depth {
            return Err(Error::DimensionMismatch { expected: depth, got: widths.len() });
        }
        let old = self.dims.dims();
        if widths.iter().zip(&old[1..=depth]).any(|(w, o)| w < o) {
            return Err(Error::Invalid(format!("cannot narrow hidden widths {:?} to {widths:?}", &old[1..=depth])));
        }
        let mut dims = vec![old[0]];
        dims.extend_from_slice(widths);
        dims.push(self.dims.output());
        let parts = self.parts();
        let mut hidden = Vec::with_capacity(depth);
        for (j, layer) in parts.hidden.iter().enumerate() {
            let (r0, c0) = (old[j + 1], old[j]);
            let (r1, c1) = (dims[j + 1], dims[j]);
            hidden.push(HiddenLayer {
                a: embed(&layer.a, r0, c0, r1, c1),
                b: pad(&layer.b, r1, 0.0),
                alpha: pad(&layer.alpha, r1, [1.0, 1.0]),
            });
        }
        let (r, c0, c1) = (self.dims.output(), old[depth], dims[depth]);
        let readout = Decomposed { hidden, a: embed(&parts.a, r, c0, r, c1), c: parts.c };
        Self::from_parts(MultiIndex::new(dims)?, self.activation, &readout)
    }

    /// Pads depth then width to reach `target`; input and output widths must
    /// already agree and the target must be at least as deep and wide.
    pub fn pad_to(&self, target: &MultiIndex) -> Result<Self> {
        if target.input() != self.dims.input() || target.output() != self.dims.output() {
            return Err(Error::Invalid("padding cannot change input or output widths".into()));
        }
        if target.depth() < self.dims.depth() {
            return Err(Error::Invalid("padding cannot remove layers".into()));
        }
        let deeper = self.pad_depth(target.depth() - self.dims.depth())?;
        let d = target.dims();
        deeper.widen(&d[1..d.len() - 1])
    }
}

fn transpose_mul(a: &[f64], rows: usize, cols: usize, g: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; cols];
    for i in 0..rows {
        for k in 0..cols {
            out[k] += a[i * cols + k] * g[i];
        }
    }
    out
}

fn embed(a: &[f64], r0: usize, c0: usize, r1: usize, c1: usize) -> Vec<f64> {
    let mut out = vec![0.0; r1 * c1];
    for i in 0..r0 {
        out[i * c1..i * c1 + c0].copy_from_slice(&a[i * c0..(i + 1) * c0]);
    }
    out
}

fn pad<T: Copy>(v: &[T], len: usize, fill: T) -> Vec<T> {
    let mut out = v.to_vec();
    out.resize(len, fill);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::ScalarFn;

    #[test]
    fn zero_parameters_give_zero_output() {
        let net = Network::zeros(MultiIndex::new(vec![3, 4, 2]).unwrap(), ActivationKind::smooth());
        assert_eq!(net.forward(&[1.0, -2.0, 0.5]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn hand_built_affine_map() {
        // hidden: z = 2x + 1 with alpha = (1, 1); readout: identity.
        let md = MultiIndex::new(vec![1, 1, 1]).unwrap();
        let theta = vec![2.0, 1.0, 1.0, 1.0, 1.0, 0.0];
        for kind in [ActivationKind::Singular, ActivationKind::smooth()] {
            let net = Network::new(md.clone(), kind, theta.clone()).unwrap();
            assert_eq!(net.forward(&[3.0]).unwrap(), vec![7.0]);
        }
    }

    #[test]
    fn gradients_match_central_differences() {
        let md = MultiIndex::new(vec![2, 3, 2, 2]).unwrap();
        let kinds = [
            ActivationKind::smooth(),
            ActivationKind::Smooth { sigma: ScalarFn::Tanh },
            ActivationKind::Classical { sigma: ScalarFn::Softplus },
        ];
        for kind in kinds {
            let theta: Vec<f64> = (0..md.param_count()).map(|i| libm::sin(1.3 * i as f64 + 0.2) * 0.8).collect();
            let net = Network::new(md.clone(), kind, theta.clone()).unwrap();
            let x = [0.3, -0.7];
            let g = [0.6, -1.1];
            let mut grad = vec![0.0; theta.len()];
            let tr = net.trace(&x).unwrap();
            net.backprop(&tr, &g, &mut grad).unwrap();
            for k in 0..theta.len() {
                let h = 1e-6;
                let mut tp = theta.clone();
                tp[k] += h;
                let mut tm = theta.clone();
                tm[k] -= h;
                let fp = Network::new(md.clone(), kind, tp).unwrap().forward(&x).unwrap();
                let fm = Network::new(md.clone(), kind, tm).unwrap().forward(&x).unwrap();
                let fd: f64 = (0..2).map(|i| g[i] * (fp[i] - fm[i]) / (2.0 * h)).sum();
                assert!((fd - grad[k]).abs() <= 1e-5 * (1.0 + fd.abs()), "{kind:?} param {k}: {fd} vs {}", grad[k]);
            }
        }
    }

    #[test]
    fn trace_agrees_with_forward() {
        let md = MultiIndex::new(vec![2, 5, 3]).unwrap();
        let theta: Vec<f64> = (0..md.param_count()).map(|i| libm::cos(i as f64)).collect();
        let net = Network::new(md, ActivationKind::Singular, theta).unwrap();
        let x = [0.4, 1.3];
        assert_eq!(net.trace(&x).unwrap().output, net.forward(&x).unwrap());
    }

    #[test]
    fn classical_cannot_be_depth_padded() {
        let net = Network::zeros(MultiIndex::new(vec![1, 1]).unwrap(), ActivationKind::classical());
        assert!(matches!(net.pad_depth(1), Err(Error::Unsupported(_))));
    }
}
