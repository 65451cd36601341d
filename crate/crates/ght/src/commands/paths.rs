use ght_core::causal::{
    euler_path, fit_exp_envelope, path_membership, ExpEnvelope, InitialCondition, PathClassSpec, PathWindow,
    SdeCoefficients, TimeGrid,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Loaded;
use crate::context::{num, opt, RunContext};
use crate::error::{HarnessError, Result};

/// `dX = (A X + b) dt + B dW` with constant `B` (`d x r`, row-major).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearSde {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub diffusion: Vec<f64>,
    pub noise_dim: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsParams {
    pub sde: LinearSde,
    pub initial: InitialCondition,
    pub step: f64,
    pub horizon: usize,
    pub n_paths: usize,
    pub eps: f64,
    #[serde(default)]
    pub classes: Vec<PathClassSpec>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PathsSummary {
    pub n_paths: usize,
    pub eps: f64,
    pub containment_frequency: f64,
    pub envelope: ExpEnvelope,
    pub second_moments: Vec<f64>,
}

pub const MEMBERSHIP_HEADER: [&str; 6] = ["path", "class", "member", "worst_index", "worst_constraint", "worst_slack"];
pub const ENVELOPE_HEADER: [&str; 4] = ["n", "rate", "bound", "weight"];

pub struct Simulated {
    pub paths: Vec<PathWindow>,
    pub summary: PathsSummary,
}

/// Euler paths in parallel (path `i` uses stream `(seed, i)`), the fitted
/// exponential envelope and its empirical containment frequency.
pub fn simulate(params: &PathsParams, seed: u64) -> Result<Simulated> {
    let d = params.initial.dim();
    let r = params.sde.noise_dim;
    let s = &params.sde;
    if s.a.len() != d * d || s.b.len() != d || s.diffusion.len() != d * r {
        return Err(HarnessError::config(format!(
            "key `sde`: expected a with {} entries, b with {d} and diffusion with {}",
            d * d,
            d * r
        )));
    }
    if params.n_paths == 0 {
        return Err(HarnessError::config("key `n_paths` must be positive"));
    }
    let alpha = |_: f64, x: &[f64]| -> Vec<f64> {
        (0..d).map(|i| s.b[i] + (0..d).map(|j| s.a[i * d + j] * x[j]).sum::<f64>()).collect()
    };
    let beta = |_: f64, _: &[f64]| -> Vec<f64> { s.diffusion.clone() };
    let sde = SdeCoefficients { alpha: &alpha, beta: &beta, noise_dim: r };
    let grid = TimeGrid::uniform(0, params.horizon as i64, params.step)?;
    let paths = (0..params.n_paths as u64)
        .into_par_iter()
        .map(|i| euler_path(&sde, &params.initial, &grid, params.horizon, seed, i))
        .collect::<ght_core::Result<Vec<_>>>()?;
    let fit = fit_exp_envelope(&paths, params.eps)?;
    let class = PathClassSpec::KExp { envelope: fit.envelope.clone() };
    let inside = paths
        .par_iter()
        .map(|p| path_membership(&class, p).map(|m| m.member as usize))
        .collect::<ght_core::Result<Vec<_>>>()?;
    let containment_frequency = inside.iter().sum::<usize>() as f64 / paths.len() as f64;
    let summary = PathsSummary {
        n_paths: params.n_paths,
        eps: params.eps,
        containment_frequency,
        envelope: fit.envelope,
        second_moments: fit.second_moments,
    };
    Ok(Simulated { paths, summary })
}

pub fn membership_rows(classes: &[PathClassSpec], paths: &[PathWindow]) -> Result<Vec<Vec<String>>> {
    let mut rows = Vec::new();
    for (i, p) in paths.iter().enumerate() {
        for c in classes {
            let m = path_membership(c, p)?;
            let w = m.worst.as_ref();
            rows.push(vec![
                i.to_string(),
                c.tag().to_string(),
                m.member.to_string(),
                opt(w.map(|e| e.index)),
                w.map(|e| e.constraint.name().to_string()).unwrap_or_default(),
                opt(w.map(|e| num(e.slack))),
            ]);
        }
    }
    Ok(rows)
}

pub fn run(loaded: &Loaded<PathsParams>, ctx: &mut RunContext) -> Result<()> {
    let params = &loaded.config.params;
    let seed = loaded.config.require_seed()?;
    let sim = simulate(params, seed)?;
    let env = &sim.summary.envelope;
    let rows: Vec<Vec<String>> = (0..=params.horizon as u64)
        .map(|n| vec![n.to_string(), num(env.c_n(n)), num(env.bound(n)), num(env.weight(n as i64))])
        .collect();
    ctx.write_csv("envelope.csv", &ENVELOPE_HEADER, &rows)?;
    let mut classes = vec![PathClassSpec::KExp { envelope: env.clone() }];
    classes.extend(params.classes.iter().cloned());
    ctx.write_csv("membership.csv", &MEMBERSHIP_HEADER, &membership_rows(&classes, &sim.paths)?)?;
    ctx.write_json("summary.json", &sim.summary)
}
