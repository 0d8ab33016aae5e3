//! One Monte Carlo exchange per scheme.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::scheme::SchemeId;
use crate::channel::{superpose_uplink, transmit_p2p, LinkScenario, UplinkScenario};
use crate::endnode::{build_p2p_frame, extract_partner, p2p_receive, P2pOptions};
use crate::error::Result;
use crate::phy::codec::encode_bits;
use crate::phy::{build_frame, BitVector, FrameLayout, NodeRole, OfdmParams};
use crate::relay::{relay_receive, FrameDiagnostics, NoiseSource, RelayConfig, TimingMode};
use crate::rng::SimRng;

/// Receiver settings shared by every trial of a run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrialContext {
    pub params: OfdmParams,
    /// Relay settings; a genie timing mode takes its offset from the scenario
    /// and a genie noise source its variance.
    pub relay: RelayConfig,
    pub p2p: P2pOptions,
}

/// All links of one two-way exchange.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exchange {
    pub uplink: UplinkScenario,
    /// Relay to A.
    pub downlink_a: LinkScenario,
    /// Relay to B.
    pub downlink_b: LinkScenario,
}

impl Exchange {
    /// A's uplink on its own, as used by the slotted schemes.
    pub fn uplink_a(&self) -> LinkScenario {
        LinkScenario {
            taps: self.uplink.taps_a.clone(),
            cfo: self.uplink.cfo_a,
            noise_variance: self.uplink.noise_variance,
        }
    }

    /// B's uplink on its own; its arrival offset only matters when it
    /// overlaps A.
    pub fn uplink_b(&self) -> LinkScenario {
        LinkScenario {
            taps: self.uplink.taps_b.clone(),
            cfo: self.uplink.cfo_b,
            noise_variance: self.uplink.noise_variance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub scheme: SchemeId,
    pub snr_db: f64,
    pub offset: usize,
    pub seed: u64,
    /// Relay timing succeeded (FPNC) or both uplink receptions synced.
    pub sync_ok: bool,
    /// FPNC/SNC: the relay's XOR packet is wrong. TS: either uplink packet is wrong.
    pub uplink_frame_error: bool,
    /// One indicator per point-to-point leg run in this trial.
    pub p2p_frame_errors: Vec<bool>,
    /// Errors in the relay's XOR packet (payload bits only).
    pub xor_bit_errors: usize,
    pub total_bits: usize,
    /// FPNC only: errors in the hard XOR decisions before decoding.
    pub coded_bit_errors: usize,
    pub coded_total_bits: usize,
    /// Both end nodes recovered the partner's packet.
    pub exchange_ok: bool,
}

fn hamming(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// What a point-to-point receiver delivered.
struct Leg {
    /// Decoded packet, all zeros on a sync failure.
    bits: BitVector,
    synced: bool,
}

impl Leg {
    /// A sync failure is an error even if the sent packet happened to be
    /// all zeros.
    fn failed(&self, sent: &BitVector) -> bool {
        !self.synced || self.bits.bits != sent.bits
    }
}

fn p2p_leg(payload: &BitVector, link: &LinkScenario, ctx: &TrialContext, rng: &mut SimRng) -> Result<Leg> {
    let (x, layout) = build_p2p_frame(payload, &ctx.params)?;
    let y = transmit_p2p(&x, link, rng)?;
    let out = p2p_receive(&y, &layout, &ctx.params, &ctx.p2p)?;
    Ok(if out.sync_ok {
        Leg {
            bits: out.decoded_bits,
            synced: true,
        }
    } else {
        Leg {
            bits: BitVector::source(vec![0; payload.len()]),
            synced: false,
        }
    })
}

/// The relay's XOR of two separately decoded packets and its bit errors
/// against the true XOR. Errors common to both decodes cancel.
pub fn xor_of_decodes(decoded_a: &BitVector, decoded_b: &BitVector, truth: &BitVector) -> Result<(BitVector, usize)> {
    let xor = decoded_a.xor(decoded_b)?;
    let errors = hamming(&xor.bits, &truth.bits);
    Ok((xor, errors))
}

/// Whether a node holding `own` gets `partner` out of the broadcast it received.
fn recovers(leg: &Leg, own: &BitVector, partner: &BitVector) -> Result<bool> {
    Ok(leg.synced && extract_partner(&leg.bits, own)?.bits == partner.bits)
}

fn relay_config(ctx: &TrialContext, scenario: &UplinkScenario) -> RelayConfig {
    let mut cfg = ctx.relay;
    if let TimingMode::Genie { .. } = cfg.timing {
        cfg.timing = TimingMode::Genie {
            offset: scenario.offset_b,
        };
    }
    if let NoiseSource::Genie(_) = cfg.noise {
        cfg.noise = NoiseSource::Genie(scenario.noise_variance);
    }
    cfg
}

/// FPNC uplink and the relay's output, without the downlink.
pub struct FpncUplink {
    pub layout: FrameLayout,
    /// Packet the relay decoded (all zeros on a sync failure).
    pub xor_bits: BitVector,
    /// Hard XOR decisions (all zeros on a sync failure).
    pub coded_bits: Vec<u8>,
    pub sync_ok: bool,
    pub diagnostics: Option<FrameDiagnostics>,
}

pub fn run_fpnc_uplink(
    ctx: &TrialContext,
    scenario: &UplinkScenario,
    payload_a: &BitVector,
    payload_b: &BitVector,
    rng: &mut SimRng,
) -> Result<FpncUplink> {
    let (fa, layout) = build_frame(NodeRole::A, payload_a, &ctx.params)?;
    let (fb, _) = build_frame(NodeRole::B, payload_b, &ctx.params)?;
    let y = superpose_uplink(&fa, &fb, scenario, rng)?;
    let mut cfg = relay_config(ctx, scenario);
    if let Some((glitches, _)) = cfg.cfo_glitches {
        cfg.cfo_glitches = Some((glitches, rng.next_u64()));
    }
    let out = relay_receive(&y, &layout, &ctx.params, &cfg)?;
    Ok(match out.frame {
        Some(f) => FpncUplink {
            layout,
            xor_bits: f.xor_source_bits,
            coded_bits: f.xor_coded_bits.bits,
            sync_ok: true,
            diagnostics: out.diagnostics,
        },
        None => FpncUplink {
            xor_bits: BitVector::source(vec![0; payload_a.len()]),
            coded_bits: vec![0; 2 * (layout.padded_bits + crate::phy::TAIL_BITS)],
            layout,
            sync_ok: false,
            diagnostics: None,
        },
    })
}

/// Simultaneous uplink, XOR mapping and decoding at the relay, then the
/// broadcast to both nodes.
pub fn run_fpnc_trial(
    ctx: &TrialContext,
    exchange: &Exchange,
    payload_a: &BitVector,
    payload_b: &BitVector,
    rng: &mut SimRng,
    snr_db: f64,
) -> Result<(TrialRecord, Option<FrameDiagnostics>)> {
    let seed = rng.seed();
    let truth = payload_a.xor(payload_b)?;
    let up = run_fpnc_uplink(ctx, &exchange.uplink, payload_a, payload_b, rng)?;
    let xor_bit_errors = hamming(&up.xor_bits.bits, &truth.bits);

    let mut padded = truth.bits.clone();
    padded.resize(up.layout.padded_bits, 0);
    let true_coded = encode_bits(&padded);
    let coded_bit_errors = hamming(&up.coded_bits, &true_coded);

    // The relay broadcasts whatever it decoded; a leg fails when the node's
    // copy differs from what was sent.
    let at_a = p2p_leg(&up.xor_bits, &exchange.downlink_a, ctx, rng)?;
    let at_b = p2p_leg(&up.xor_bits, &exchange.downlink_b, ctx, rng)?;
    let p2p_frame_errors = vec![at_a.failed(&up.xor_bits), at_b.failed(&up.xor_bits)];
    let exchange_ok = recovers(&at_a, payload_a, payload_b)? && recovers(&at_b, payload_b, payload_a)?;

    let record = TrialRecord {
        scheme: SchemeId::Fpnc,
        snr_db,
        offset: exchange.uplink.offset_b,
        seed,
        sync_ok: up.sync_ok,
        uplink_frame_error: xor_bit_errors > 0 || !up.sync_ok,
        p2p_frame_errors,
        xor_bit_errors,
        total_bits: truth.len(),
        coded_bit_errors,
        coded_total_bits: true_coded.len(),
        exchange_ok,
    };
    Ok((record, up.diagnostics))
}

/// Two separate uplinks; the relay XORs its two decodes before checking.
pub fn run_snc_trial(
    ctx: &TrialContext,
    exchange: &Exchange,
    payload_a: &BitVector,
    payload_b: &BitVector,
    rng: &mut SimRng,
    snr_db: f64,
) -> Result<TrialRecord> {
    let seed = rng.seed();
    let truth = payload_a.xor(payload_b)?;
    let ra = p2p_leg(payload_a, &exchange.uplink_a(), ctx, rng)?;
    let rb = p2p_leg(payload_b, &exchange.uplink_b(), ctx, rng)?;
    let (xor, xor_bit_errors) = xor_of_decodes(&ra.bits, &rb.bits, &truth)?;

    let at_a = p2p_leg(&xor, &exchange.downlink_a, ctx, rng)?;
    let at_b = p2p_leg(&xor, &exchange.downlink_b, ctx, rng)?;
    let p2p_frame_errors = vec![
        ra.failed(payload_a),
        rb.failed(payload_b),
        at_a.failed(&xor),
        at_b.failed(&xor),
    ];
    let exchange_ok = recovers(&at_a, payload_a, payload_b)? && recovers(&at_b, payload_b, payload_a)?;
    Ok(TrialRecord {
        scheme: SchemeId::Snc,
        snr_db,
        offset: exchange.uplink.offset_b,
        seed,
        sync_ok: ra.synced && rb.synced,
        uplink_frame_error: xor_bit_errors > 0 || !ra.synced || !rb.synced,
        p2p_frame_errors,
        xor_bit_errors,
        total_bits: truth.len(),
        coded_bit_errors: 0,
        coded_total_bits: 0,
        exchange_ok,
    })
}

/// Four point-to-point slots: A→R, R→B, B→R, R→A.
pub fn run_ts_trial(
    ctx: &TrialContext,
    exchange: &Exchange,
    payload_a: &BitVector,
    payload_b: &BitVector,
    rng: &mut SimRng,
    snr_db: f64,
) -> Result<TrialRecord> {
    let seed = rng.seed();
    let truth = payload_a.xor(payload_b)?;
    let ra = p2p_leg(payload_a, &exchange.uplink_a(), ctx, rng)?;
    let at_b = p2p_leg(&ra.bits, &exchange.downlink_b, ctx, rng)?;
    let rb = p2p_leg(payload_b, &exchange.uplink_b(), ctx, rng)?;
    let at_a = p2p_leg(&rb.bits, &exchange.downlink_a, ctx, rng)?;
    let xor_bit_errors = hamming(&ra.bits.xor(&rb.bits)?.bits, &truth.bits);
    let p2p_frame_errors = vec![
        ra.failed(payload_a),
        at_b.failed(&ra.bits),
        rb.failed(payload_b),
        at_a.failed(&rb.bits),
    ];
    Ok(TrialRecord {
        scheme: SchemeId::Ts,
        snr_db,
        offset: exchange.uplink.offset_b,
        seed,
        sync_ok: ra.synced && rb.synced,
        uplink_frame_error: p2p_frame_errors[0] || p2p_frame_errors[2],
        p2p_frame_errors,
        xor_bit_errors,
        total_bits: truth.len(),
        coded_bit_errors: 0,
        coded_total_bits: 0,
        exchange_ok: !at_b.failed(payload_a) && !at_a.failed(payload_b),
    })
}

pub fn run_trial(
    scheme: SchemeId,
    ctx: &TrialContext,
    exchange: &Exchange,
    payload_a: &BitVector,
    payload_b: &BitVector,
    rng: &mut SimRng,
    snr_db: f64,
) -> Result<(TrialRecord, Option<FrameDiagnostics>)> {
    match scheme {
        SchemeId::Fpnc => run_fpnc_trial(ctx, exchange, payload_a, payload_b, rng, snr_db),
        SchemeId::Snc => Ok((run_snc_trial(ctx, exchange, payload_a, payload_b, rng, snr_db)?, None)),
        SchemeId::Ts => Ok((run_ts_trial(ctx, exchange, payload_a, payload_b, rng, snr_db)?, None)),
    }
}
