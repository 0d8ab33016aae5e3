//! Point-to-point receiver for single-user frames (downlinks and one-at-a-time
//! uplinks) and the end node's self-information XOR.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phy::codec::decode_bits;
use crate::phy::preamble::{gen_pilots, lts_freq, sts_unit};
use crate::phy::{build_frame, BitVector, FrameLayout, NodeRole, OfdmParams};
use crate::relay::cfo::{estimate_cfo_one, CfoEstimator};
use crate::relay::estimate::{estimate_from_units, track_channel};
use crate::relay::sync::{genie_sync, sync_single, SyncResult, TimingMode};
use crate::channel::rotate;
use crate::signal::{dft, TimeSignal};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct P2pOptions {
    pub estimator: CfoEstimator,
    pub timing: TimingMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct P2pDiagnostics {
    pub sync: Option<SyncResult>,
    pub phi_hat: f64,
    /// LTS estimate on the occupied band, ascending subcarrier, as `[re, im]`.
    pub h: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct P2pReceiverOutput {
    /// Empty exactly when timing failed.
    pub decoded_bits: BitVector,
    pub sync_ok: bool,
    pub diagnostics: Option<P2pDiagnostics>,
}

impl P2pReceiverOutput {
    fn failed() -> Self {
        Self {
            decoded_bits: BitVector::source(Vec::new()),
            sync_ok: false,
            diagnostics: None,
        }
    }

    /// Whether the decoded packet equals `truth` (sync failures count as errors).
    pub fn frame_ok(&self, truth: &BitVector) -> bool {
        self.sync_ok && self.decoded_bits.bits == truth.bits
    }
}

/// Receives a frame sent with role A's LTS slot and pilots.
pub fn p2p_receive(
    y: &TimeSignal,
    layout: &FrameLayout,
    params: &OfdmParams,
    opts: &P2pOptions,
) -> Result<P2pReceiverOutput> {
    let sync = match opts.timing {
        TimingMode::Genie { .. } => genie_sync(params, 0),
        TimingMode::Estimated => match sync_single(y, &sts_unit(params).samples, params) {
            Ok(s) => s,
            Err(_) => return Ok(P2pReceiverOutput::failed()),
        },
    };
    let n = params.n_fft;
    let b = sync.lts_boundary_a;
    let data_start = b + params.lts_field_len();
    if data_start + layout.n_symbols() * params.symbol_len() > y.len() {
        return Ok(P2pReceiverOutput::failed());
    }

    let unit_start = b + params.cp_len;
    let phi = estimate_cfo_one(&y.samples[unit_start..unit_start + 2 * n], n, opts.estimator);
    let yc = rotate(y, -phi);
    let base = estimate_from_units(&yc.samples, unit_start, &lts_freq(params), params, NodeRole::A)?
        .estimate;

    let tones = params.data_subcarriers();
    let mut coded = Vec::with_capacity(layout.n_symbols() * tones.len());
    for m in 0..layout.n_symbols() {
        let start = data_start + m * params.symbol_len() + params.cp_len;
        let spec = dft(&yc.samples[start..start + n], n)?;
        let h = track_channel(&spec, &base, &gen_pilots(NodeRole::A, m, params), params, m);
        for &k in &tones {
            let z = spec.bins[params.bin(k)] * h.at(k).conj();
            coded.push(u8::from(z.re < 0.0));
        }
    }
    let mut decoded = decode_bits(&coded)?;
    decoded.truncate(layout.payload_bits);
    let h = params
        .occupied_band
        .iter()
        .map(|&k| {
            let g = base.at(k);
            [g.re, g.im]
        })
        .collect();
    Ok(P2pReceiverOutput {
        decoded_bits: BitVector::source(decoded),
        sync_ok: true,
        diagnostics: Some(P2pDiagnostics {
            sync: Some(sync),
            phi_hat: phi,
            h,
        }),
    })
}

/// Single-user frame as sent on any point-to-point leg: role A's LTS slot
/// and pilots, whoever the sender is.
pub fn build_p2p_frame(payload: &BitVector, params: &OfdmParams) -> Result<(TimeSignal, FrameLayout)> {
    build_frame(NodeRole::Relay, payload, params)
}

/// Recovers the partner's packet from the XOR packet and the node's own.
pub fn extract_partner(xor_bits: &BitVector, own_bits: &BitVector) -> Result<BitVector> {
    if xor_bits.len() != own_bits.len() {
        return Err(Error::LengthMismatch {
            expected: own_bits.len(),
            actual: xor_bits.len(),
        });
    }
    let bits = xor_bits
        .bits
        .iter()
        .zip(&own_bits.bits)
        .map(|(a, b)| a ^ b)
        .collect();
    Ok(BitVector::source(bits))
}
