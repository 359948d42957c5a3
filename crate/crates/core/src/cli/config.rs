//! Optional TOML defaults. Command-line flags always win over these, and
//! these win over built-in defaults.

use std::fs;
use std::path::Path;

use serde::Deserialize;
use w1kp::evaluation::TiePolicy;
use w1kp::{Error, MetricKind, Result};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub metric: Option<MetricKind>,
    pub seed: Option<u64>,
    pub pair_count: Option<usize>,
    pub folds: Option<usize>,
    pub round_to: Option<f64>,
    pub tie_policy: Option<TiePolicy>,
    pub mc_samples: Option<u64>,
    pub exact_budget: Option<u64>,
    pub dims: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| {
            let location = e
                .span()
                .map(|s| format!("byte {}", s.start))
                .unwrap_or_else(|| "document".into());
            Error::format(path.display().to_string(), location, e.message().to_owned())
        })
    }
}
