use std::sync::Arc;

use ght_core::causal::{
    compression_rate, sde_kernel_map, AcMapSpec, FiniteComplexityMap, Holder, PathWindow, RateParams, RateRow,
    TimeGrid, VecField,
};
use ght_core::hyper::{
    assemble_dynamic, fit_step_encoder, normalized_error, DynamicFitConfig, DynamicReport, NormalizedError,
};
use ght_core::metric::DiscreteMeasure;
use ght_core::qas::QasSpace;
use ght_core::rng::{seeded, uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::line_space;
use crate::config::Loaded;
use crate::context::{num, RunContext};
use crate::dto::GhtBundle;
use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Drift {
    /// `scale sin(t + x)`.
    SinTimePlusState { scale: f64 },
    /// `a x + b`.
    Linear { a: f64, b: f64 },
    Zero,
}

impl Drift {
    fn field(self) -> VecField {
        match self {
            Self::SinTimePlusState { scale } => Arc::new(move |t, x| vec![scale * (t + x[0]).sin()]),
            Self::Linear { a, b } => Arc::new(move |_, x| vec![a * x[0] + b]),
            Self::Zero => Arc::new(|_, _| vec![0.0]),
        }
    }
}

/// One-step Gaussian kernel of a scalar SDE with constant volatility.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SdeTarget {
    pub drift: Drift,
    pub sigma: f64,
    #[serde(default = "unit")]
    pub delta: f64,
    #[serde(default = "sixteen")]
    pub atoms: usize,
}

fn unit() -> f64 {
    1.0
}

fn sixteen() -> usize {
    16
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lo: i64,
    pub hi: i64,
    pub step: f64,
}

/// Paths with independent uniform values in `[lo, hi]` at every index.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathSampler {
    pub count: usize,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicParams {
    pub target: SdeTarget,
    pub n_t: usize,
    pub eps: f64,
    pub grid: GridSpec,
    pub paths: PathSampler,
    #[serde(default = "line_space")]
    pub space: QasSpace,
    #[serde(default)]
    pub fit: DynamicFitConfig,
    /// Defaults to the whole-line row with the diameter of `[lo, hi]`.
    #[serde(default)]
    pub rate_row: Option<RateRow>,
    #[serde(default)]
    pub holder: Option<Holder>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub within_window_sup: f64,
    pub normalized_error: f64,
    pub raw_sup: f64,
    pub rate_row: String,
}

pub const HEADER: [&str; 4] = ["n", "raw_error", "denominator", "normalized_error"];

pub fn sample_paths(sampler: &PathSampler, grid: &TimeGrid, seed: u64) -> Result<Vec<PathWindow>> {
    if sampler.count == 0 || !(sampler.lo <= sampler.hi) {
        return Err(HarnessError::config("key `paths`: need count >= 1 and lo <= hi"));
    }
    let mut rng = seeded(seed);
    let width = sampler.hi - sampler.lo;
    let mut out = Vec::with_capacity(sampler.count);
    for _ in 0..sampler.count {
        let vals: Vec<Vec<f64>> = (0..grid.len()).map(|_| vec![sampler.lo + width * uniform(&mut rng)]).collect();
        out.push(PathWindow::new(grid.clone(), &vals)?);
    }
    Ok(out)
}

fn target_map(t: &SdeTarget) -> Result<FiniteComplexityMap> {
    let sigma = t.sigma;
    Ok(sde_kernel_map(t.drift.field(), Arc::new(move |_, _| vec![sigma]), t.delta, DiscreteMeasure::dirac(&[0.0])?, t.atoms)?)
}

/// Runs the dynamic pipeline with the per-step encoder fits in parallel.
pub fn fit(
    params: &DynamicParams,
    seed: u64,
) -> Result<(ght_core::hyper::Ght, DynamicReport, NormalizedError, Vec<PathWindow>)> {
    let grid = TimeGrid::uniform(params.grid.lo, params.grid.hi, params.grid.step)?;
    let paths = sample_paths(&params.paths, &grid, seed)?;
    let spec = AcMapSpec::exact(target_map(&params.target)?);
    let map = spec.at(params.eps / 4.0)?;
    let mut cfg = params.fit.clone();
    cfg.encoder_train.seed = seed;
    cfg.hyper_seed = seed;
    let h = params.n_t as i64;
    let steps = (-h..=h)
        .into_par_iter()
        .map(|n| fit_step_encoder(&map, &paths, n, &cfg))
        .collect::<ght_core::Result<Vec<_>>>()?;
    let (ght, report) = assemble_dynamic(&map, steps, &paths, params.n_t, &params.space, params.eps, &cfg)?;

    let row = params.rate_row.clone().unwrap_or(RateRow::KZ { diam: params.paths.hi - params.paths.lo });
    let rates = RateParams {
        eps: params.eps,
        dim: map.input_dim,
        memory: map.memory,
        delta_plus: grid.delta_plus(),
        n_t: params.n_t as u64,
        holder: params.holder.unwrap_or(Holder { l_rho: 1.0, l_f: 1.0, alpha: 1.0 }),
    };
    let table = |n: i64| compression_rate(&row, &rates, n);
    let c_ac = |n: i64| spec.c_ac(n, params.eps);
    let normalized = normalized_error(&map, &ght, &paths, &c_ac, &table, params.n_t, params.eps, None)?;
    Ok((ght, report, normalized, paths))
}

pub fn run(loaded: &Loaded<DynamicParams>, ctx: &mut RunContext) -> Result<()> {
    let params = &loaded.config.params;
    let seed = loaded.config.require_seed()?;
    let (ght, report, normalized, _) = fit(params, seed)?;
    let rows: Vec<Vec<String>> = normalized
        .rows
        .iter()
        .map(|r| vec![r.n.to_string(), num(r.raw), num(r.denominator), num(r.normalized)])
        .collect();
    ctx.write_csv("errors.csv", &HEADER, &rows)?;
    let window: Vec<Vec<String>> =
        report.window.iter().zip(&report.within_window_errors).map(|(n, e)| vec![n.to_string(), num(*e)]).collect();
    ctx.write_csv("window_errors.csv", &["n", "within_window_error"], &window)?;
    ctx.write_json("fit_report.json", &report)?;
    ctx.write_json("model.json", &GhtBundle::from_model(&ght))?;
    let row_tag = params.rate_row.as_ref().map(|r| r.tag()).unwrap_or("k_z").to_string();
    let summary = Summary {
        within_window_sup: report.within_window_sup,
        normalized_error: normalized.value,
        raw_sup: normalized.raw_sup,
        rate_row: row_tag,
    };
    ctx.write_json("summary.json", &summary)?;
    if let Some(max) = loaded.config.tolerance.max_error {
        if report.within_window_sup > max {
            return Err(HarnessError::Numeric(format!(
                "within-window error {} exceeds tolerance {max}",
                report.within_window_sup
            )));
        }
    }
    Ok(())
}
