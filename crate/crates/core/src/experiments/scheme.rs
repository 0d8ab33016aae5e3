use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Two-way relay exchange schemes compared by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeId {
    /// Simultaneous uplink with per-subcarrier XOR mapping, then one broadcast.
    Fpnc,
    /// Two separate uplinks, XOR at the relay, then one broadcast.
    Snc,
    /// Four point-to-point slots.
    Ts,
}

impl SchemeId {
    pub const ALL: [SchemeId; 3] = [SchemeId::Fpnc, SchemeId::Snc, SchemeId::Ts];

    pub fn slots(self) -> u32 {
        match self {
            SchemeId::Fpnc => 2,
            SchemeId::Snc => 3,
            SchemeId::Ts => 4,
        }
    }

    /// Stable index used when deriving random streams.
    pub fn stream_id(self) -> u64 {
        match self {
            SchemeId::Fpnc => 0,
            SchemeId::Snc => 1,
            SchemeId::Ts => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeId::Fpnc => "fpnc",
            SchemeId::Snc => "snc",
            SchemeId::Ts => "ts",
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fpnc" => Ok(SchemeId::Fpnc),
            "snc" => Ok(SchemeId::Snc),
            "ts" => Ok(SchemeId::Ts),
            other => Err(Error::Config(format!("unknown scheme '{other}'"))),
        }
    }
}
