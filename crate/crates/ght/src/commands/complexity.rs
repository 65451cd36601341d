use ght_core::transformer::{
    complexity_ffnn, complexity_static, ActivationClass, ComplexityReport, ConstantPolicy, FfnnInputs, StaticInputs,
};
use serde::Deserialize;

use crate::config::Loaded;
use crate::context::{num, opt, RunContext};
use crate::error::Result;

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "table", rename_all = "snake_case", deny_unknown_fields)]
pub enum ComplexityParams {
    /// Geometric transformer bounds.
    Static {
        inputs: StaticInputs,
        activations: Vec<ActivationClass>,
        /// Replaces `inputs.eps_a` row by row.
        #[serde(default)]
        sweep: Option<Vec<f64>>,
    },
    /// Feedforward encoder bounds.
    Ffnn {
        inputs: FfnnInputs,
        activations: Vec<ActivationClass>,
        /// Replaces `inputs.eps` row by row.
        #[serde(default)]
        sweep: Option<Vec<f64>>,
    },
}

pub const HEADER: [&str; 13] = [
    "table",
    "activation",
    "accuracy",
    "depth",
    "width",
    "parameters",
    "codes",
    "ln_codes",
    "quantization_level",
    "implicit_depth",
    "input_complexity_constant",
    "absolute_constant",
    "absolute_constant_defaulted",
];

fn class_name(c: ActivationClass) -> &'static str {
    match c {
        ActivationClass::Singular => "singular",
        ActivationClass::Smooth => "smooth",
        ActivationClass::Classical => "classical",
    }
}

fn row(table: &str, accuracy: f64, r: &ComplexityReport) -> Vec<String> {
    vec![
        table.to_string(),
        class_name(r.activation).to_string(),
        num(accuracy),
        opt(r.depth),
        num(r.width),
        opt(r.params),
        opt(r.n_codes),
        opt(r.ln_n),
        opt(r.q),
        opt(r.implicit_d),
        opt(r.c_k),
        opt(r.c),
        r.c_defaulted.to_string(),
    ]
}

/// Evaluates the bound formulas; strict mode refuses a missing absolute constant.
pub fn run(loaded: &Loaded<ComplexityParams>, ctx: &mut RunContext) -> Result<()> {
    let policy = if ctx.strict { ConstantPolicy::Strict } else { ConstantPolicy::Permissive };
    let mut rows = Vec::new();
    let mut defaulted = false;
    match &loaded.config.params {
        ComplexityParams::Static { inputs, activations, sweep } => {
            let accuracies = sweep.clone().unwrap_or_else(|| vec![inputs.eps_a]);
            for &eps in &accuracies {
                let inp = StaticInputs { eps_a: eps, ..inputs.clone() };
                for &a in activations {
                    let r = complexity_static(a, &inp, policy, None)?;
                    defaulted |= r.c_defaulted;
                    rows.push(row("static", eps, &r));
                }
            }
        }
        ComplexityParams::Ffnn { inputs, activations, sweep } => {
            let accuracies = sweep.clone().unwrap_or_else(|| vec![inputs.eps]);
            for &eps in &accuracies {
                let inp = FfnnInputs { eps, ..inputs.clone() };
                for &a in activations {
                    let r = complexity_ffnn(a, &inp, policy)?;
                    defaulted |= r.c_defaulted;
                    rows.push(row("ffnn", eps, &r));
                }
            }
        }
    }
    if defaulted {
        ctx.defaults.push("absolute constant c = 1".into());
    }
    ctx.write_csv("complexity.csv", &HEADER, &rows)
}
