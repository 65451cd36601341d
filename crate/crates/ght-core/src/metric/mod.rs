//! Exact discrete metrics on measures, path measures and Gaussians.

mod adapted;
mod barycenter;
mod gaussian;
mod measure;
mod series;
mod simplex;
mod transport;
mod wasserstein;

pub use adapted::{adapted_wasserstein_p, PathTree, TreeNode};
pub use barycenter::wasserstein2_barycenter_1d;
pub use gaussian::{gaussian_distance, spd_exp, spd_log, sym_eigen, GaussianMeasure};
pub use measure::{total_variation, DiscreteMeasure, PathMeasure, WEIGHT_TOL};
pub use series::{convergent_power_sum, PowerSum};
pub use simplex::{project_cube, project_simplex, simplex_projection_vjp, SimplexWeight};
pub use transport::{solve_transport, TransportPlan};
pub use wasserstein::{ground_cost, optimal_coupling, wasserstein_p, wasserstein_p_lp};
