//! Training fields: the shared STS, the role-specific doubled LTS, and the
//! nulled pilot pattern that keeps the two uplinks' pilots on disjoint tones.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::frame::NodeRole;
use super::OfdmParams;
use crate::error::{Error, Result};
use crate::signal::{idft, Spectrum, TimeSignal};

/// Subcarrier index to pilot value, covering all four pilot tones.
pub type PilotMap = BTreeMap<i32, Complex64>;

/// 802.11a short training tones (before the `sqrt(13/6)` scale), as
/// (signed subcarrier, sign of `1+j`).
const STS_TONES: [(i32, f64); 12] = [
    (-24, 1.0),
    (-20, -1.0),
    (-16, 1.0),
    (-12, -1.0),
    (-8, -1.0),
    (-4, 1.0),
    (4, -1.0),
    (8, -1.0),
    (12, 1.0),
    (16, 1.0),
    (20, 1.0),
    (24, 1.0),
];

/// 802.11a long training sequence on subcarriers -26..=26 (DC is 0).
pub const LTS_SEQUENCE: [i8; 53] = [
    1, 1, -1, -1, 1, 1, -1, 1, -1, 1, 1, 1, 1, 1, 1, -1, -1, 1, 1, -1, 1, -1, 1, 1, 1, 1, 0, 1,
    -1, -1, 1, 1, -1, 1, -1, 1, -1, -1, -1, -1, -1, 1, 1, -1, -1, 1, -1, 1, -1, 1, 1, 1, 1,
];

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

pub fn sts_freq(params: &OfdmParams) -> Spectrum {
    let scale = (13.0f64 / 6.0).sqrt();
    let mut bins = vec![zero(); params.n_fft];
    for (k, s) in STS_TONES {
        bins[params.bin(k)] = Complex64::new(s, s) * scale;
    }
    Spectrum { bins }
}

/// One period of the short training field.
pub fn sts_unit(params: &OfdmParams) -> TimeSignal {
    let full = idft(&sts_freq(params)).expect("n_fft validated");
    TimeSignal::new(full.samples[..params.sts_unit_len()].to_vec())
}

/// The short training field: ten repetitions of the STS unit.
pub fn gen_sts(params: &OfdmParams) -> TimeSignal {
    let unit = sts_unit(params);
    let samples = unit
        .samples
        .iter()
        .copied()
        .cycle()
        .take(params.sts_len())
        .collect();
    TimeSignal::new(samples)
}

/// Known LTS value on every occupied subcarrier, zero elsewhere.
pub fn lts_freq(params: &OfdmParams) -> Spectrum {
    let mut bins = vec![zero(); params.n_fft];
    for (i, &v) in LTS_SEQUENCE.iter().enumerate() {
        let k = i as i32 - 26;
        bins[params.bin(k)] = Complex64::new(f64::from(v), 0.0);
    }
    Spectrum { bins }
}

pub fn lts_unit(params: &OfdmParams) -> TimeSignal {
    idft(&lts_freq(params)).expect("n_fft validated")
}

/// One node's slot: `[CP, lts, lts]`.
fn lts_slot(params: &OfdmParams) -> Vec<Complex64> {
    let unit = lts_unit(params).samples;
    let n = params.n_fft;
    let mut slot = unit[n - params.cp_len..].to_vec();
    slot.extend_from_slice(&unit);
    slot.extend_from_slice(&unit);
    slot
}

/// The doubled LTS field for `role`: A transmits in the first slot and is
/// silent in the second, B the reverse.
pub fn gen_lts(role: NodeRole, params: &OfdmParams) -> Result<TimeSignal> {
    let slot = lts_slot(params);
    let silence = vec![zero(); slot.len()];
    let samples = match role {
        NodeRole::A => [slot, silence].concat(),
        NodeRole::B => [silence, slot].concat(),
        NodeRole::Relay => {
            return Err(Error::Config(
                "the relay has no LTS slot of its own; frame it as role A".into(),
            ))
        }
    };
    Ok(TimeSignal::new(samples))
}

/// Pilot values of data symbol `symbol_index` for `role`: `+1` on the node's
/// own two tones and zero on the partner's. The relay's downlink uses A's
/// pattern.
pub fn gen_pilots(role: NodeRole, _symbol_index: usize, params: &OfdmParams) -> PilotMap {
    let own = match role {
        NodeRole::A | NodeRole::Relay => params.pilot_indices_a,
        NodeRole::B => params.pilot_indices_b,
    };
    params
        .all_pilots()
        .into_iter()
        .map(|k| {
            let v = if own.contains(&k) {
                Complex64::new(1.0, 0.0)
            } else {
                zero()
            };
            (k, v)
        })
        .collect()
}
