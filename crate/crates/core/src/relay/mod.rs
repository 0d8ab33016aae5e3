//! Relay receive-and-forward chain: timing, dual CFO, two-user channel
//! estimation, XOR mapping, channel decoding of the XOR codeword and
//! re-encoding for the downlink broadcast.

pub mod cfo;
pub mod estimate;
pub mod mapping;
pub mod sync;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::phy::codec::decode_bits;
use crate::phy::preamble::{gen_pilots, lts_freq, sts_unit};
use crate::phy::{build_frame, BitRole, BitVector, FrameLayout, NodeRole, OfdmParams};
use crate::rng::SimRng;
use crate::signal::{dft, TimeSignal};

pub use cfo::{compensate_cfo, estimate_cfo_one, AngleOutliers, CfoEstimate, CfoEstimator, CfoStrategy};
pub use estimate::{estimate_channels, track_channel, ChannelEstimate, LtsWindows};
pub use mapping::{map_symbol, MappingRule};
pub use sync::{sts_sync, synchronize, SyncFailure, SyncResult, TimingMode};

/// Where the exact mapping rule gets its noise variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseSource {
    /// Time-domain `σ²` known from the scenario.
    Genie(f64),
    /// Estimated from the disagreement between repeated LTS units.
    LtsResidual,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelayConfig {
    pub strategy: CfoStrategy,
    pub estimator: CfoEstimator,
    pub mapping: MappingRule,
    pub timing: TimingMode,
    pub noise: NoiseSource,
    /// Phase-detector glitches for robustness experiments, with the seed
    /// that places them.
    pub cfo_glitches: Option<(AngleOutliers, u64)>,
}

impl Default for RelayConfig {
    fn default() -> Self {
        Self {
            strategy: CfoStrategy::Mean,
            estimator: CfoEstimator::Median,
            mapping: MappingRule::LogMax,
            timing: TimingMode::Estimated,
            noise: NoiseSource::Genie(0.0),
            cfo_glitches: None,
        }
    }
}

/// The relay's decoded XOR packet and the frame it broadcasts.
#[derive(Debug, Clone, PartialEq)]
pub struct XorFrame {
    /// Hard XOR decisions, one per data subcarrier per symbol.
    pub xor_coded_bits: BitVector,
    /// Decoded `S_A ⊕ S_B`, padding removed.
    pub xor_source_bits: BitVector,
    pub downlink_signal: TimeSignal,
}

/// Per-frame receiver internals for offline inspection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameDiagnostics {
    pub peak_indices: Vec<usize>,
    pub lts_boundary_a: usize,
    pub lts_boundary_b: usize,
    pub phi_hat_a: f64,
    pub phi_hat_b: f64,
    pub phi_tilde: f64,
    /// LTS estimates on the occupied band, ascending subcarrier, as `[re, im]`.
    pub h_a: Vec<[f64; 2]>,
    pub h_b: Vec<[f64; 2]>,
}

#[derive(Debug, Clone)]
pub struct RelayOutput {
    pub sync: std::result::Result<SyncResult, SyncFailure>,
    pub cfo: Option<CfoEstimate>,
    /// Present only when timing succeeded.
    pub frame: Option<XorFrame>,
    pub diagnostics: Option<FrameDiagnostics>,
}

impl RelayOutput {
    pub fn sync_ok(&self) -> bool {
        self.frame.is_some()
    }

    fn failed(reason: SyncFailure) -> Self {
        Self {
            sync: Err(reason),
            cfo: None,
            frame: None,
            diagnostics: None,
        }
    }
}

fn band_values(h: &ChannelEstimate, params: &OfdmParams) -> Vec<[f64; 2]> {
    params
        .occupied_band
        .iter()
        .map(|&k| {
            let g = h.at(k);
            [g.re, g.im]
        })
        .collect()
}

/// Demaps XOR symbols, decodes them and frames the result for broadcast.
pub fn cnc_decode_and_forward(
    xor_symbols: &[i8],
    layout: &FrameLayout,
    params: &OfdmParams,
) -> Result<XorFrame> {
    let coded: Vec<u8> = xor_symbols.iter().map(|&s| mapping::symbol_to_bit(s)).collect();
    let mut decoded = decode_bits(&coded)?;
    decoded.truncate(layout.payload_bits);
    let xor_source_bits = BitVector::new(decoded, BitRole::Xor);
    let (downlink_signal, _) = build_frame(NodeRole::Relay, &xor_source_bits, params)?;
    Ok(XorFrame {
        xor_coded_bits: BitVector::new(coded, BitRole::Coded),
        xor_source_bits,
        downlink_signal,
    })
}

/// Runs the full uplink chain on the relay's receive window `y`, whose index
/// 0 is where A's frame would start under perfect timing.
pub fn relay_receive(
    y: &TimeSignal,
    layout: &FrameLayout,
    params: &OfdmParams,
    cfg: &RelayConfig,
) -> Result<RelayOutput> {
    let sts = sts_unit(params).samples;
    let sync = match synchronize(y, &sts, params, cfg.timing) {
        Ok(s) => s,
        Err(f) => return Ok(RelayOutput::failed(f)),
    };
    let n = params.n_fft;
    let ba = sync.lts_boundary_a;
    let data_start = ba + params.lts_field_len();
    if data_start + layout.n_symbols() * params.symbol_len() > y.len() {
        return Ok(RelayOutput::failed(SyncFailure::Truncated));
    }

    let windows = LtsWindows::anchored(ba, params);
    let win_a = &y.samples[windows.a..windows.a + 2 * n];
    let win_b = &y.samples[windows.b..windows.b + 2 * n];
    let (phi_a, phi_b) = match &cfg.cfo_glitches {
        None => (
            estimate_cfo_one(win_a, n, cfg.estimator),
            estimate_cfo_one(win_b, n, cfg.estimator),
        ),
        Some((glitches, seed)) => {
            let mut rng = SimRng::new(*seed);
            (
                cfo::estimate_cfo_corrupted(win_a, n, cfg.estimator, glitches, &mut rng),
                cfo::estimate_cfo_corrupted(win_b, n, cfg.estimator, glitches, &mut rng),
            )
        }
    };
    let cfo = CfoEstimate::new(phi_a, phi_b);
    let yc = compensate_cfo(y, cfg.strategy, &cfo);

    let lts = lts_freq(params);
    let units_a = estimate::estimate_from_units(&yc.samples, windows.a, &lts, params, NodeRole::A)?;
    let units_b = estimate::estimate_from_units(&yc.samples, windows.b, &lts, params, NodeRole::B)?;
    let noise_var = match cfg.noise {
        NoiseSource::Genie(s2) => n as f64 * s2,
        NoiseSource::LtsResidual => estimate::noise_from_units(&[&units_a, &units_b], params),
    };

    let tones = params.data_subcarriers();
    let mut symbols = Vec::with_capacity(layout.n_symbols() * tones.len());
    for m in 0..layout.n_symbols() {
        let start = data_start + m * params.symbol_len() + params.cp_len;
        let spec = dft(&yc.samples[start..start + n], n)?;
        let ha = track_channel(&spec, &units_a.estimate, &gen_pilots(NodeRole::A, m, params), params, m);
        let hb = track_channel(&spec, &units_b.estimate, &gen_pilots(NodeRole::B, m, params), params, m);
        for &k in &tones {
            let v: Complex64 = spec.bins[params.bin(k)];
            symbols.push(map_symbol(v, ha.at(k), hb.at(k), cfg.mapping, noise_var));
        }
    }

    let frame = cnc_decode_and_forward(&symbols, layout, params)?;
    let diagnostics = FrameDiagnostics {
        peak_indices: sync.peak_indices.clone(),
        lts_boundary_a: sync.lts_boundary_a,
        lts_boundary_b: sync.lts_boundary_b,
        phi_hat_a: cfo.phi_hat_a,
        phi_hat_b: cfo.phi_hat_b,
        phi_tilde: cfo.phi_tilde,
        h_a: band_values(&units_a.estimate, params),
        h_b: band_values(&units_b.estimate, params),
    };
    Ok(RelayOutput {
        sync: Ok(sync),
        cfo: Some(cfo),
        frame: Some(frame),
        diagnostics: Some(diagnostics),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{superpose_uplink, CfoSpec, ChannelTaps, UplinkScenario};
    use crate::phy::codec::encode_bits;

    fn run(scenario: &UplinkScenario, seed: u64, cfg: &RelayConfig) -> (RelayOutput, BitVector) {
        let params = OfdmParams::default();
        let mut rng = SimRng::new(seed);
        let sa = BitVector::source(rng.bits(400));
        let sb = BitVector::source(rng.bits(400));
        let (fa, layout) = build_frame(NodeRole::A, &sa, &params).unwrap();
        let (fb, _) = build_frame(NodeRole::B, &sb, &params).unwrap();
        let y = superpose_uplink(&fa, &fb, scenario, &mut rng).unwrap();
        let out = relay_receive(&y, &layout, &params, cfg).unwrap();
        (out, sa.xor(&sb).unwrap())
    }

    #[test]
    fn aligned_noiseless_roundtrip() {
        let s = UplinkScenario::clean(ChannelTaps::identity(), ChannelTaps::identity(), 0);
        let (out, truth) = run(&s, 1, &RelayConfig::default());
        let f = out.frame.unwrap();
        assert_eq!(f.xor_source_bits.bits, truth.bits);
    }

    #[test]
    fn offset_two_tap_noiseless_roundtrip() {
        let s = UplinkScenario::clean(
            ChannelTaps::new(vec![Complex64::from_polar(1.0, 0.3), Complex64::new(0.2, -0.3)], 0).unwrap(),
            ChannelTaps::new(vec![Complex64::from_polar(0.9, 2.0), Complex64::new(-0.3, 0.1)], 0).unwrap(),
            8,
        );
        let (out, truth) = run(&s, 2, &RelayConfig::default());
        let sync = out.sync.as_ref().unwrap();
        assert_eq!(sync.detected_offset, 8);
        let f = out.frame.unwrap();
        assert_eq!(f.xor_source_bits.bits, truth.bits);
        let mut padded = truth.bits.clone();
        padded.resize(f.xor_coded_bits.len() / 2 - 6, 0);
        assert_eq!(f.xor_coded_bits.bits, encode_bits(&padded));
    }

    #[test]
    fn dual_cfo_noiseless_roundtrip() {
        let mut s = UplinkScenario::clean(ChannelTaps::identity(), ChannelTaps::new(vec![Complex64::new(0.0, 1.0)], 0).unwrap(), 4);
        s.cfo_a = CfoSpec::new(0.004);
        s.cfo_b = CfoSpec::new(-0.003);
        let (out, truth) = run(&s, 3, &RelayConfig::default());
        let cfo = out.cfo.unwrap();
        assert!((cfo.phi_hat_a - 0.004).abs() < 1e-9);
        assert!((cfo.phi_hat_b + 0.003).abs() < 1e-9);
        assert_eq!(out.frame.unwrap().xor_source_bits.bits, truth.bits);
    }

    #[test]
    fn exact_rule_with_estimated_noise() {
        let mut s = UplinkScenario::clean(ChannelTaps::identity(), ChannelTaps::delay(0), 3);
        s.noise_variance = 1e-5;
        let cfg = RelayConfig {
            mapping: MappingRule::Exact,
            noise: NoiseSource::LtsResidual,
            ..RelayConfig::default()
        };
        let (out, truth) = run(&s, 4, &cfg);
        assert_eq!(out.frame.unwrap().xor_source_bits.bits, truth.bits);
    }

    #[test]
    fn noise_only_is_a_sync_failure() {
        let params = OfdmParams::default();
        let layout = FrameLayout::new(&params, 100).unwrap();
        let mut rng = SimRng::new(1);
        let y = TimeSignal::new((0..layout.total_len + 50).map(|_| rng.complex_gaussian(1.0)).collect());
        let out = relay_receive(&y, &layout, &params, &RelayConfig::default()).unwrap();
        assert!(!out.sync_ok());
        assert!(out.sync.is_err());
    }
}
