use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};

/// Limits checked after a run; exceeding one is a numeric failure.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerance {
    pub max_error: Option<f64>,
}

/// `{"seed", "out", "strict", "tolerance", "params"}` with a
/// subcommand-specific `params` block.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig<P> {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub strict: bool,
    #[serde(default)]
    pub tolerance: Tolerance,
    pub params: P,
}

impl<P> ExperimentConfig<P> {
    pub fn require_seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| HarnessError::config("missing key `seed`: this run draws random numbers"))
    }
}

/// A parsed config with its canonical hash.
pub struct Loaded<P> {
    pub config: ExperimentConfig<P>,
    pub sha256: String,
    /// Directory relative file references resolve against.
    pub base: PathBuf,
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Reads `path`, applies a seed override and hashes the canonical
/// (key-sorted) JSON of the effective config.
pub fn load<P: DeserializeOwned>(path: &Path, seed: Option<u64>) -> Result<Loaded<P>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::config(format!("cannot read config {}: {e}", path.display())))?;
    parse(&text, seed, path.parent().unwrap_or(Path::new(".")))
}

pub fn parse<P: DeserializeOwned>(text: &str, seed: Option<u64>, base: &Path) -> Result<Loaded<P>> {
    let mut value: Value = serde_json::from_str(text).map_err(|e| HarnessError::config(format!("malformed JSON: {e}")))?;
    let obj = value.as_object_mut().ok_or_else(|| HarnessError::config("config must be a JSON object"))?;
    if let Some(s) = seed {
        obj.insert("seed".into(), Value::from(s));
    }
    let canonical = serde_json::to_vec(&value).expect("JSON values serialize");
    let sha256 = hex(&Sha256::digest(&canonical));
    let config = serde_json::from_value(value).map_err(|e| HarnessError::config(e.to_string()))?;
    Ok(Loaded { config, sha256, base: base.to_path_buf() })
}
