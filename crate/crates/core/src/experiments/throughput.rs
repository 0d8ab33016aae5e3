//! Per-direction throughput from frame error rates.

use serde::{Deserialize, Serialize};

use super::scheme::SchemeId;
use crate::error::{Error, Result};

fn unit(what: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::OutOfUnitRange { what, value })
    }
}

/// Throughput of `scheme` given its uplink FER and the shared P2P FER.
///
/// FPNC: `½(1−P_up)(1−P_p2p)`; SNC: `⅓(1−P_up)(1−P_p2p)`; TS: `¼(1−P_p2p)²`
/// (the uplink FER is ignored for TS, whose every slot is a P2P link).
pub fn throughput(scheme: SchemeId, uplink_fer: f64, p2p_fer: f64) -> Result<f64> {
    let up = unit("uplink FER", uplink_fer)?;
    let p2p = unit("P2P FER", p2p_fer)?;
    let slots = f64::from(scheme.slots());
    Ok(match scheme {
        SchemeId::Fpnc | SchemeId::Snc => (1.0 - up) * (1.0 - p2p) / slots,
        SchemeId::Ts => (1.0 - p2p) * (1.0 - p2p) / slots,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThroughputSet {
    pub fpnc: f64,
    pub snc: f64,
    pub ts: f64,
}

impl ThroughputSet {
    pub fn new(pnc_uplink_fer: f64, snc_uplink_fer: f64, p2p_fer: f64) -> Result<Self> {
        Ok(Self {
            fpnc: throughput(SchemeId::Fpnc, pnc_uplink_fer, p2p_fer)?,
            snc: throughput(SchemeId::Snc, snc_uplink_fer, p2p_fer)?,
            ts: throughput(SchemeId::Ts, 0.0, p2p_fer)?,
        })
    }

    /// Relative gain of FPNC over TS, e.g. `1.0` for +100%.
    pub fn gain_over_ts(&self) -> f64 {
        self.fpnc / self.ts - 1.0
    }

    pub fn gain_over_snc(&self) -> f64 {
        self.fpnc / self.snc - 1.0
    }
}
