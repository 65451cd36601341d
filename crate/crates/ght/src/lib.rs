//! Reproducible experiment runner: JSON configs in, CSV and JSON out, one
//! manifest per run.

pub mod commands;
pub mod config;
pub mod context;
pub mod dto;
pub mod error;

use std::path::PathBuf;
use std::time::Instant;

use serde::de::DeserializeOwned;

use crate::config::{load, Loaded};
use crate::context::{RunContext, RunManifest};
pub use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Metric,
    Complexity,
    StaticFit,
    DynamicFit,
    Paths,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Metric => "metric",
            Self::Complexity => "complexity",
            Self::StaticFit => "static-fit",
            Self::DynamicFit => "dynamic-fit",
            Self::Paths => "paths",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub strict: bool,
    /// Worker threads for library-level parallelism; `None` uses the default pool.
    pub threads: Option<usize>,
}

pub const MANIFEST: &str = "manifest.json";

fn execute<P: DeserializeOwned>(
    opts: &RunOptions,
    body: fn(&Loaded<P>, &mut RunContext) -> Result<()>,
) -> Result<(Option<u64>, String, RunContext)> {
    let loaded: Loaded<P> = load(&opts.config, opts.seed)?;
    let out = opts.out.clone().or_else(|| loaded.config.out.clone()).unwrap_or_else(|| PathBuf::from("ght-out"));
    let mut ctx = RunContext::new(out, opts.strict || loaded.config.strict)?;
    body(&loaded, &mut ctx)?;
    Ok((loaded.config.seed, loaded.sha256, ctx))
}

/// Runs one subcommand and writes its manifest next to the outputs.
pub fn run(command: Command, opts: &RunOptions) -> Result<RunManifest> {
    let start = Instant::now();
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(t) = opts.threads {
            b = b.num_threads(t);
        }
        b.build().map_err(|e| HarnessError::config(format!("cannot start {:?} worker threads: {e}", opts.threads)))?
    };
    let (seed, sha, mut ctx) = pool.install(|| match command {
        Command::Metric => execute(opts, commands::metric::run),
        Command::Complexity => execute(opts, commands::complexity::run),
        Command::StaticFit => execute(opts, commands::static_fit::run),
        Command::DynamicFit => execute(opts, commands::dynamic_fit::run),
        Command::Paths => execute(opts, commands::paths::run),
    })?;
    let manifest = RunManifest {
        command: command.name().into(),
        config_sha256: sha,
        library_version: env!("CARGO_PKG_VERSION").into(),
        seed,
        strict: ctx.strict,
        threads: pool.current_num_threads(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        outputs: ctx.outputs.clone(),
        permissive_defaults: ctx.defaults.clone(),
    };
    ctx.write_json(MANIFEST, &manifest)?;
    Ok(manifest)
}
