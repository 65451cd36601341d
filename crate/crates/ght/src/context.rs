use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{HarnessError, Result};

/// Output directory plus the bookkeeping that ends up in the manifest.
pub struct RunContext {
    pub out: PathBuf,
    pub strict: bool,
    pub outputs: Vec<String>,
    /// Documented defaults filled in by permissive mode.
    pub defaults: Vec<String>,
}

impl RunContext {
    pub fn new(out: PathBuf, strict: bool) -> Result<Self> {
        std::fs::create_dir_all(&out).map_err(|source| HarnessError::Output { path: out.clone(), source })?;
        Ok(Self { out, strict, outputs: Vec::new(), defaults: Vec::new() })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.outputs.push(name.to_string());
        self.out.join(name)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
        text.push('\n');
        write(&path, text.as_bytes())
    }

    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush().map_err(|source| HarnessError::Output { path, source })?;
        Ok(())
    }
}

pub fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|source| HarnessError::Output { path: path.to_path_buf(), source })
}

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_sha256: String,
    pub library_version: String,
    pub seed: Option<u64>,
    pub strict: bool,
    pub threads: usize,
    pub wall_time_seconds: f64,
    pub outputs: Vec<String>,
    pub permissive_defaults: Vec<String>,
}
