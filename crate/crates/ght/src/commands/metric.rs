use ght_core::metric::{adapted_wasserstein_p, gaussian_distance, total_variation, wasserstein_p};
use serde::Deserialize;

use crate::config::Loaded;
use crate::context::{num, RunContext};
use crate::dto::{MeasureSpec, Resolved};
use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricParams {
    #[serde(default = "one")]
    pub p: f64,
    pub pairs: Vec<PairSpec>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub name: String,
    pub a: MeasureSpec,
    pub b: MeasureSpec,
}

pub const HEADER: [&str; 6] = ["pair", "p", "wasserstein", "adapted_wasserstein", "total_variation", "gaussian"];

/// Pairwise distances; columns that do not apply to a pair stay empty.
pub fn run(loaded: &Loaded<MetricParams>, ctx: &mut RunContext) -> Result<()> {
    let params = &loaded.config.params;
    let p = params.p;
    let mut rows = Vec::with_capacity(params.pairs.len());
    for pair in &params.pairs {
        let a = pair.a.resolve(&loaded.base)?;
        let b = pair.b.resolve(&loaded.base)?;
        let blank = String::new;
        let row = match (&a, &b) {
            (Resolved::Discrete(x), Resolved::Discrete(y)) => {
                vec![num(wasserstein_p(x, y, p)?), blank(), num(total_variation(x, y)?), blank()]
            }
            (Resolved::Paths(x), Resolved::Paths(y)) => vec![
                num(wasserstein_p(x.law(), y.law(), p)?),
                num(adapted_wasserstein_p(x, y, p)?),
                num(total_variation(x.law(), y.law())?),
                blank(),
            ],
            (Resolved::Gaussian(x), Resolved::Gaussian(y)) => vec![blank(), blank(), blank(), num(gaussian_distance(x, y)?)],
            _ => {
                return Err(HarnessError::config(format!("pair `{}`: keys `a` and `b` have different kinds", pair.name)));
            }
        };
        let mut full = vec![pair.name.clone(), num(p)];
        full.extend(row);
        rows.push(full);
    }
    ctx.write_csv("distances.csv", &HEADER, &rows)
}
