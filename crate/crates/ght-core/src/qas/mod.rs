//! Quantized mixable metric spaces: a quantizer from finite codes onto
//! points, a mixing map over the simplex and the metric that scores both.

mod bases;
mod encode;
mod modulus;
mod space;

pub use bases::{faber_schauder, forward_rate_kernel, geometric_knots, PathStatistic, SchauderBasis};
pub use modulus::{quantization_modulus_estimate, simplicial_defect, ModulusEstimate};
pub use space::{
    AdaptedSpace, BaseSpace, ExpFamilySpace, GaussianSpace, Mixer, QasPoint, QasSpace, QuantizationCode,
    RkhsSpace, SchauderSpace, WassersteinSpace,
};
