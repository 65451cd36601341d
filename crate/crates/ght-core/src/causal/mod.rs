//! Discrete-time paths, compact path classes, causal maps of finite
//! complexity, SDE-induced example maps and compression rates.

mod classes;
mod grid;
mod maps;
mod rates;
mod sde;
mod simulate;

pub use classes::{
    fit_exp_envelope, path_membership, BaseSet, Constraint, EnvelopeFit, ExpEnvelope, MembershipReport, PathClassSpec,
    SlackEntry, WeightFn,
};
pub use grid::{grid_validate, PathWindow, TimeGrid};
pub use maps::{
    eval_finite_complexity, AcMapSpec, CausalMap, CompressionFn, DecoderFn, EncoderFn, FamilyFn, FiniteComplexityMap,
};
pub use rates::{compression_rate, worst_case_rate, Holder, RateParams, RateRow};
pub use sde::{
    convolve, gaussian_discretization, gaussian_mid_quantiles, infinite_memory_truncation, normal_quantile,
    sde_kernel_map, sde_two_step_adapted, ScalarField, TruncatedMap, TwoStepConfig, VecField,
};
pub use simulate::{euler_path, euler_simulate, InitialCondition, SdeCoefficients};
