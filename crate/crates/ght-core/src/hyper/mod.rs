//! Geometric hypertransformers: parameter schedules driven by a hypernetwork,
//! the dynamic fit pipeline, self-compression and normalized errors.

mod fit;
mod model;
mod score;

pub use fit::{
    assemble_dynamic, common_dims, fit_dynamic, fit_step_encoder, perturbation_scale, DynamicFitConfig, DynamicReport,
    StepFit,
};
pub use model::{ght_eval, theta_unroll, Ght, ThetaSchedule};
pub use score::{evaluable_window, normalized_error, self_compression, NormalizedError, NormalizedRow};
