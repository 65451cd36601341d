//! Geometric transformers: encoder, attention over quantized codes, fit
//! procedures and complexity calculators.

mod capacity;
mod complexity;
mod fit;
mod model;

pub use capacity::{metric_capacity_estimate, CapacityEstimate};
pub use complexity::{
    complexity_ffnn, complexity_static, input_complexity_constant, ln_codes, solve_implicit_d, ActivationClass,
    ComplexityReport, ConstantPolicy, FfnnInputs, StaticInputs,
};
pub use fit::{
    evaluate_errors, farthest_point_net, fit_static_constructive, fit_static_end2end, nearest_center,
    nearest_center_encoder, Budget, EncoderMode, End2EndConfig, FitReport, StaticFitConfig,
};
pub use model::{gt_eval, GeometricTransformer};
