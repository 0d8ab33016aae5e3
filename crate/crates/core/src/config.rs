//! Scenario files: TOML documents deserialized into [`SweepConfig`].
//!
//! Every key is optional and falls back to the desk-scale defaults. Unknown
//! keys are rejected so that typos do not silently run the default.
//!
//! ```toml
//! snr_db = [10.0, 15.0, 20.0]
//! offsets = [8]
//! trials = 1000
//! schemes = ["fpnc", "snc", "ts"]
//! cfo_a = 0.002
//! cfo_b = -0.002
//!
//! [channel_a]
//! kind = "random_multipath"
//! paths = 3
//! decay_db = 6.0
//!
//! [receiver]
//! cfo_strategy = "mean"
//! cfo_estimator = "median"
//! mapping = "logmax"
//! ```

use std::path::Path;

use crate::error::{Error, Result};
use crate::experiments::SweepConfig;

pub fn parse_scenario(text: &str) -> Result<SweepConfig> {
    toml::from_str(text).map_err(|e| Error::Config(format!("scenario: {}", e.message())))
}

/// Reads and parses a scenario file. Validation is left to the caller, which
/// usually applies command-line overrides first.
pub fn load_scenario(path: &Path) -> Result<SweepConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_scenario(&text)
}

pub fn to_toml(cfg: &SweepConfig) -> Result<String> {
    toml::to_string(cfg).map_err(|e| Error::Config(format!("cannot serialize scenario: {e}")))
}
