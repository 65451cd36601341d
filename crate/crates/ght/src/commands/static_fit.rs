use ght_core::metric::DiscreteMeasure;
use ght_core::qas::{QasPoint, QasSpace};
use ght_core::transformer::{
    fit_static_constructive, fit_static_end2end, Budget, End2EndConfig, FitReport, GeometricTransformer, StaticFitConfig,
};
use serde::{Deserialize, Serialize};

use super::{line_space, Interval};
use crate::config::Loaded;
use crate::context::{num, opt, RunContext};
use crate::dto::{GtBundle, MeasureSpec, Resolved};
use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StaticTarget {
    /// `x -> (delta_{-x} + delta_x) / 2` on the line.
    SymmetricDiracs,
    /// `x -> delta_x`.
    Dirac,
    /// Explicit input/output pairs; the fit only sees these inputs.
    Dataset { inputs: Vec<Vec<f64>>, outputs: Vec<MeasureSpec> },
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Constructive,
    End2end,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaticParams {
    pub target: StaticTarget,
    #[serde(default)]
    pub inputs: Option<Interval>,
    #[serde(default)]
    pub eval: Option<Interval>,
    #[serde(default = "line_space")]
    pub space: QasSpace,
    pub n_grid: Vec<usize>,
    pub q_grid: Vec<usize>,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub constructive: StaticFitConfig,
    #[serde(default)]
    pub end2end: End2EndConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct BudgetReport {
    pub n_codes: usize,
    pub q: usize,
    pub report: FitReport,
}

pub const HEADER: [&str; 7] = ["codes", "quantization_level", "sup_error", "mean_error", "covering_radius", "separation", "bound"];

struct Target {
    xs: Vec<Vec<f64>>,
    eval: Option<Vec<Vec<f64>>>,
    table: Vec<(Vec<f64>, QasPoint)>,
    kind: StaticTarget,
}

impl Target {
    fn eval(&self, x: &[f64]) -> ght_core::Result<QasPoint> {
        match self.kind {
            StaticTarget::SymmetricDiracs => {
                let v = x[0];
                Ok(QasPoint::Measure(DiscreteMeasure::from_points(&[vec![-v], vec![v]], vec![0.5, 0.5])?))
            }
            StaticTarget::Dirac => Ok(QasPoint::Measure(DiscreteMeasure::dirac(x)?)),
            StaticTarget::Dataset { .. } => self
                .table
                .iter()
                .find(|(k, _)| k.as_slice() == x)
                .map(|(_, y)| y.clone())
                .ok_or_else(|| ght_core::Error::Invalid("input outside the dataset".into())),
        }
    }
}

fn build_target(loaded: &Loaded<StaticParams>) -> Result<Target> {
    let p = &loaded.config.params;
    let eval = p.eval.map(|i| i.points()).transpose()?;
    match &p.target {
        StaticTarget::Dataset { inputs, outputs } => {
            if inputs.len() != outputs.len() {
                return Err(HarnessError::config("key `outputs`: one output per input is required"));
            }
            let mut table = Vec::with_capacity(inputs.len());
            for (x, y) in inputs.iter().zip(outputs) {
                let point = match y.resolve(&loaded.base)? {
                    Resolved::Discrete(m) => QasPoint::Measure(m),
                    Resolved::Paths(m) => QasPoint::Path(m),
                    Resolved::Gaussian(g) => QasPoint::Gaussian(g),
                };
                table.push((x.clone(), point));
            }
            Ok(Target { xs: inputs.clone(), eval: None, table, kind: p.target.clone() })
        }
        other => {
            let grid = p.inputs.ok_or_else(|| HarnessError::config("missing key `inputs` for a built-in target"))?;
            Ok(Target { xs: grid.points()?, eval, table: Vec::new(), kind: other.clone() })
        }
    }
}

/// Error-versus-budget curve over the `N x q` grid.
pub fn run(loaded: &Loaded<StaticParams>, ctx: &mut RunContext) -> Result<()> {
    let p = &loaded.config.params;
    if p.n_grid.is_empty() || p.q_grid.is_empty() {
        return Err(HarnessError::config("keys `n_grid` and `q_grid` must be non-empty"));
    }
    let target = build_target(loaded)?;
    let mut end2end = p.end2end.clone();
    if p.mode == Mode::End2end {
        end2end.train.seed = loaded.config.require_seed()?;
    }
    let f = |x: &[f64]| target.eval(x);
    let mut reports = Vec::new();
    let mut rows = Vec::new();
    let mut last: Option<GeometricTransformer> = None;
    for &q in &p.q_grid {
        for &n in &p.n_grid {
            let budget = Budget { n, q };
            let eval = target.eval.as_deref();
            let (gt, report) = match p.mode {
                Mode::Constructive => fit_static_constructive(f, &target.xs, eval, &p.space, budget, &p.constructive)?,
                Mode::End2end => fit_static_end2end(f, &target.xs, eval, &p.space, budget, None, &end2end)?,
            };
            let mean = report.errors.iter().sum::<f64>() / report.errors.len().max(1) as f64;
            rows.push(vec![
                n.to_string(),
                q.to_string(),
                num(report.sup_error),
                num(mean),
                num(report.covering_radius),
                num(report.separation),
                opt(report.bound),
            ]);
            reports.push(BudgetReport { n_codes: n, q, report });
            last = Some(gt);
        }
    }
    ctx.write_csv("error_curve.csv", &HEADER, &rows)?;
    ctx.write_json("fit_report.json", &reports)?;
    if let Some(gt) = &last {
        ctx.write_json("model.json", &GtBundle::from_model(gt))?;
    }
    if let (Some(max), Some(r)) = (loaded.config.tolerance.max_error, reports.last()) {
        if r.report.sup_error > max {
            return Err(HarnessError::Numeric(format!("sup error {} exceeds tolerance {max}", r.report.sup_error)));
        }
    }
    Ok(())
}
