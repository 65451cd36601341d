use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::nn::Network;
use crate::qas::{QasPoint, QasSpace, QuantizationCode};

/// `x -> attention(f_theta(x), Y)`: a feedforward encoder followed by
/// geometric attention over fixed codes. Quantized codes are cached.
#[derive(Debug, Clone)]
pub struct GeometricTransformer {
    space: QasSpace,
    encoder: Network,
    codes: Vec<QuantizationCode>,
    points: Vec<QasPoint>,
}

impl GeometricTransformer {
    pub fn new(space: QasSpace, encoder: Network, codes: Vec<QuantizationCode>) -> Result<Self> {
        space.validate()?;
        if codes.is_empty() {
            return Err(invalid("a geometric transformer needs at least one code"));
        }
        if encoder.output_dim() != codes.len() {
            return Err(Error::DimensionMismatch { expected: codes.len(), got: encoder.output_dim() });
        }
        let level = codes[0].level;
        if codes.iter().any(|c| c.level != level) {
            return Err(invalid("all codes must share one quantization level"));
        }
        let points = codes.iter().map(|c| space.quantize(c)).collect::<Result<Vec<_>>>()?;
        Ok(Self { space, encoder, codes, points })
    }

    pub fn space(&self) -> &QasSpace {
        &self.space
    }

    pub fn encoder(&self) -> &Network {
        &self.encoder
    }

    pub fn codes(&self) -> &[QuantizationCode] {
        &self.codes
    }

    /// `Q_q(z_n)` for every code.
    pub fn points(&self) -> &[QasPoint] {
        &self.points
    }

    pub fn level(&self) -> usize {
        self.codes[0].level
    }

    pub fn input_dim(&self) -> usize {
        self.encoder.input_dim()
    }

    pub fn with_encoder(&self, encoder: Network) -> Result<Self> {
        if encoder.output_dim() != self.codes.len() {
            return Err(Error::DimensionMismatch { expected: self.codes.len(), got: encoder.output_dim() });
        }
        Ok(Self { encoder, ..self.clone() })
    }

    /// Attention applied to raw encoder features `u`.
    pub fn decode_features(&self, u: &[f64]) -> Result<QasPoint> {
        self.space.attention_points(u, &self.points)
    }
}

pub fn gt_eval(gt: &GeometricTransformer, x: &[f64]) -> Result<QasPoint> {
    let u = gt.encoder.forward(x)?;
    gt.decode_features(&u)
}
