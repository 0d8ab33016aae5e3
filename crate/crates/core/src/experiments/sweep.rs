//! SNR sweeps: trial fan-out, ordered aggregation and the CSV table.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::scheme::SchemeId;
use super::stats::{ber_estimate, fer_estimate, RateEstimate};
use super::throughput::throughput;
use super::trial::{run_trial, Exchange, TrialContext, TrialRecord};
use crate::channel::{noise_variance_for_snr, CfoSpec, ChannelModel, ImpulseNoise, LinkScenario, UplinkScenario};
use crate::endnode::P2pOptions;
use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};
use crate::phy::{BitVector, OfdmParams};
use crate::relay::{AngleOutliers, CfoEstimator, CfoStrategy, FrameDiagnostics, MappingRule, NoiseSource, RelayConfig, TimingMode};
use crate::rng::SimRng;

pub const CSV_HEADER: [&str; 11] = [
    "scheme",
    "snr_db",
    "offset",
    "trials",
    "fer",
    "fer_ci_low",
    "fer_ci_high",
    "ber",
    "ber_ci_low",
    "ber_ci_high",
    "throughput",
];

/// Outlier bursts added to the relay's uplink window, with the amplitude
/// given relative to the reference RMS sample level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpulseConfig {
    pub rate: f64,
    pub relative_amplitude: f64,
    /// Confine the bursts to the preamble of both frames.
    #[serde(default)]
    pub preamble_only: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKnowledge {
    /// The exact rule is told the true noise variance.
    #[default]
    Genie,
    /// The exact rule estimates it from the LTS repetitions.
    LtsResidual,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReceiverConfig {
    pub cfo_strategy: CfoStrategy,
    pub cfo_estimator: CfoEstimator,
    pub mapping: MappingRule,
    /// Skip STS/LTS timing and use the true boundaries.
    pub genie_timing: bool,
    pub noise: NoiseKnowledge,
}

impl ReceiverConfig {
    fn context(&self, params: &OfdmParams, glitches: Option<AngleOutliers>) -> TrialContext {
        let timing = if self.genie_timing {
            TimingMode::Genie { offset: 0 }
        } else {
            TimingMode::Estimated
        };
        TrialContext {
            params: params.clone(),
            relay: RelayConfig {
                strategy: self.cfo_strategy,
                estimator: self.cfo_estimator,
                mapping: self.mapping,
                timing,
                noise: match self.noise {
                    NoiseKnowledge::Genie => NoiseSource::Genie(0.0),
                    NoiseKnowledge::LtsResidual => NoiseSource::LtsResidual,
                },
                cfo_glitches: glitches.map(|g| (g, 0)),
            },
            p2p: P2pOptions {
                estimator: self.cfo_estimator,
                timing,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub n_fft: usize,
    pub cp_len: usize,
    pub payload_bits: usize,
    pub snr_db: Vec<f64>,
    pub offsets: Vec<usize>,
    pub trials: usize,
    pub schemes: Vec<SchemeId>,
    pub seed: u64,
    pub channel_a: ChannelModel,
    pub channel_b: ChannelModel,
    /// Relay-to-node links.
    pub downlink: ChannelModel,
    /// Normalized CFOs of A and B (radians per sample). Downlinks see the
    /// opposite rotation of the node's own uplink.
    pub cfo_a: f64,
    pub cfo_b: f64,
    pub impulse: Option<ImpulseConfig>,
    /// Phase-detector glitches in the relay's CFO estimator.
    pub cfo_glitches: Option<AngleOutliers>,
    pub receiver: ReceiverConfig,
    pub allow_cp_violation: bool,
    /// Zero noise at every SNR point (the SNR only labels rows).
    pub noiseless: bool,
    pub execution: Execution,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let multipath = ChannelModel::RandomMultipath {
            paths: 3,
            decay_db: 6.0,
        };
        Self {
            n_fft: 64,
            cp_len: 16,
            payload_bits: 1000,
            snr_db: vec![5.0, 10.0, 15.0, 20.0],
            offsets: vec![8],
            trials: 500,
            schemes: SchemeId::ALL.to_vec(),
            seed: 1,
            channel_a: multipath.clone(),
            channel_b: multipath.clone(),
            downlink: multipath,
            cfo_a: 0.0,
            cfo_b: 0.0,
            impulse: None,
            cfo_glitches: None,
            receiver: ReceiverConfig::default(),
            allow_cp_violation: false,
            noiseless: false,
            execution: Execution::default(),
        }
    }
}

impl SweepConfig {
    pub fn params(&self) -> Result<OfdmParams> {
        OfdmParams::new(self.n_fft, self.cp_len)
    }

    /// Checks everything a sweep needs before any trial runs.
    pub fn validate(&self) -> Result<OfdmParams> {
        let params = self.params()?;
        if self.payload_bits == 0 {
            return Err(Error::Config("payload_bits must be positive".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be positive".into()));
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("snr_db needs at least one finite value".into()));
        }
        if self.offsets.is_empty() {
            return Err(Error::Config("offsets must not be empty".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("schemes must not be empty".into()));
        }
        for model in [&self.channel_a, &self.channel_b, &self.downlink] {
            model.validate()?;
        }
        CfoSpec::new(self.cfo_a).check(&params)?;
        CfoSpec::new(self.cfo_b).check(&params)?;
        if let Some(imp) = self.impulse {
            if !(0.0..=1.0).contains(&imp.rate) || !imp.relative_amplitude.is_finite() || imp.relative_amplitude < 0.0 {
                return Err(Error::Config("impulse needs rate in [0, 1] and a non-negative amplitude".into()));
            }
        }
        if let Some(g) = self.cfo_glitches {
            if g.count > params.n_fft || !g.magnitude.is_finite() {
                return Err(Error::Config("cfo_glitches needs count <= n_fft and a finite magnitude".into()));
            }
        }
        if !self.allow_cp_violation {
            for &offset in &self.offsets {
                let spread = self.channel_a.max_extent().max(self.channel_b.max_extent() + offset);
                if spread > params.cp_len {
                    return Err(Error::CpViolation {
                        delay_spread: spread,
                        cp_len: params.cp_len,
                    });
                }
            }
            if self.downlink.max_extent() > params.cp_len {
                return Err(Error::CpViolation {
                    delay_spread: self.downlink.max_extent(),
                    cp_len: params.cp_len,
                });
            }
        }
        Ok(params)
    }

    fn noise_variance(&self, snr_db: f64, params: &OfdmParams) -> f64 {
        if self.noiseless {
            0.0
        } else {
            noise_variance_for_snr(snr_db, params)
        }
    }

    /// Payloads and every link of one trial, drawn from `rng`.
    pub fn draw_exchange(
        &self,
        params: &OfdmParams,
        snr_db: f64,
        offset: usize,
        rng: &mut SimRng,
    ) -> (Exchange, BitVector, BitVector) {
        let payload_a = BitVector::source(rng.bits(self.payload_bits));
        let payload_b = BitVector::source(rng.bits(self.payload_bits));
        let noise_variance = self.noise_variance(snr_db, params);
        let impulse = match self.impulse {
            Some(imp) if !self.noiseless => Some(ImpulseNoise {
                rate: imp.rate,
                amplitude: imp.relative_amplitude * params.reference_power().sqrt(),
                until: imp.preamble_only.then(|| params.preamble_len() + offset),
            }),
            _ => None,
        };
        let uplink = UplinkScenario {
            taps_a: self.channel_a.draw(rng),
            taps_b: self.channel_b.draw(rng),
            offset_b: offset,
            cfo_a: CfoSpec::new(self.cfo_a),
            cfo_b: CfoSpec::new(self.cfo_b),
            noise_variance,
            impulse,
        };
        let downlink_a = LinkScenario {
            taps: self.downlink.draw(rng),
            cfo: CfoSpec::new(-self.cfo_a),
            noise_variance,
        };
        let downlink_b = LinkScenario {
            taps: self.downlink.draw(rng),
            cfo: CfoSpec::new(-self.cfo_b),
            noise_variance,
        };
        let exchange = Exchange {
            uplink,
            downlink_a,
            downlink_b,
        };
        (exchange, payload_a, payload_b)
    }

    /// Seed of one trial. Receiver options are not part of it, so runs that
    /// differ only in receiver settings see the same channels and noise.
    pub fn trial_seed(&self, scheme: SchemeId, snr_index: usize, offset: usize, trial: usize) -> u64 {
        SimRng::stream(
            self.seed,
            &[scheme.stream_id(), snr_index as u64, offset as u64, trial as u64],
        )
        .seed()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub scheme: SchemeId,
    pub snr_db: f64,
    pub offset: usize,
    pub trials: usize,
    /// FPNC/SNC: uplink XOR-frame errors. TS: pooled point-to-point errors.
    pub fer: RateEstimate,
    /// Decoded XOR bits.
    pub ber: RateEstimate,
    /// FPNC only: hard XOR decisions before decoding.
    pub raw_ber: Option<RateEstimate>,
    /// Point-to-point FER pooled over every scheme at this (SNR, offset).
    pub p2p_fer: RateEstimate,
    pub throughput: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    /// Ordered by scheme, then SNR, then offset.
    pub rows: Vec<SweepRow>,
    /// Ordered like the rows, trials ascending within each row.
    pub records: Vec<TrialRecord>,
    /// Relay internals per FPNC trial, aligned with `records` (None for other
    /// schemes and failed syncs).
    pub diagnostics: Vec<Option<FrameDiagnostics>>,
}

impl SweepSummary {
    pub fn row(&self, scheme: SchemeId, snr_db: f64, offset: usize) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.scheme == scheme && r.snr_db == snr_db && r.offset == offset)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.scheme.to_string(),
                format_real(r.snr_db),
                r.offset.to_string(),
                r.trials.to_string(),
                format_real(r.fer.rate),
                format_real(r.fer.ci_low),
                format_real(r.fer.ci_high),
                format_real(r.ber.rate),
                format_real(r.ber.ci_low),
                format_real(r.ber.ci_high),
                format_real(r.throughput),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// One JSON object per trial: the record and, for FPNC trials that
    /// synced, the relay's timing, CFO and channel estimates.
    pub fn write_diagnostics<W: Write>(&self, mut out: W) -> Result<()> {
        #[derive(Serialize)]
        struct Line<'a> {
            record: &'a TrialRecord,
            relay: &'a Option<FrameDiagnostics>,
        }
        for (record, relay) in self.records.iter().zip(&self.diagnostics) {
            serde_json::to_writer(&mut out, &Line { record, relay })
                .map_err(|e| Error::Io(std::io::Error::other(e)))?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }
}

/// Fixed-precision formatting so the CSV bytes do not depend on float
/// printing heuristics.
fn format_real(v: f64) -> String {
    format!("{v:.6}")
}

struct Task {
    scheme: SchemeId,
    snr_index: usize,
    offset: usize,
    trial: usize,
}

pub fn snr_sweep(cfg: &SweepConfig) -> Result<SweepSummary> {
    let params = cfg.validate()?;
    let ctx = cfg.receiver.context(&params, cfg.cfo_glitches);

    let mut tasks = Vec::new();
    for &scheme in &cfg.schemes {
        for snr_index in 0..cfg.snr_db.len() {
            for &offset in &cfg.offsets {
                for trial in 0..cfg.trials {
                    tasks.push(Task {
                        scheme,
                        snr_index,
                        offset,
                        trial,
                    });
                }
            }
        }
    }

    let results = map_indexed(tasks.len(), cfg.execution, |i| {
        let t = &tasks[i];
        let snr = cfg.snr_db[t.snr_index];
        let mut rng = SimRng::new(cfg.trial_seed(t.scheme, t.snr_index, t.offset, t.trial));
        let (exchange, pa, pb) = cfg.draw_exchange(&params, snr, t.offset, &mut rng);
        run_trial(t.scheme, &ctx, &exchange, &pa, &pb, &mut rng, snr)
    });
    let mut records = Vec::with_capacity(results.len());
    let mut diagnostics = Vec::with_capacity(results.len());
    for r in results {
        let (rec, diag) = r?;
        records.push(rec);
        diagnostics.push(diag);
    }

    let rows = aggregate(cfg, &records)?;
    Ok(SweepSummary {
        rows,
        records,
        diagnostics,
    })
}

/// Builds the table from records laid out as `snr_sweep` produces them.
pub fn aggregate(cfg: &SweepConfig, records: &[TrialRecord]) -> Result<Vec<SweepRow>> {
    let per_cell = cfg.trials;
    let cells = cfg.snr_db.len() * cfg.offsets.len();
    let cell = |scheme_pos: usize, snr_index: usize, offset_pos: usize| {
        let start = ((scheme_pos * cfg.snr_db.len() + snr_index) * cfg.offsets.len() + offset_pos) * per_cell;
        &records[start..start + per_cell]
    };

    let mut p2p = vec![Vec::new(); cells];
    for s in 0..cfg.schemes.len() {
        for i in 0..cfg.snr_db.len() {
            for o in 0..cfg.offsets.len() {
                for r in cell(s, i, o) {
                    p2p[i * cfg.offsets.len() + o].extend_from_slice(&r.p2p_frame_errors);
                }
            }
        }
    }
    let p2p: Vec<RateEstimate> = p2p.iter().map(|v| fer_estimate(v)).collect();

    let mut rows = Vec::with_capacity(cfg.schemes.len() * cells);
    for (s, &scheme) in cfg.schemes.iter().enumerate() {
        for (i, &snr_db) in cfg.snr_db.iter().enumerate() {
            for (o, &offset) in cfg.offsets.iter().enumerate() {
                let recs = cell(s, i, o);
                let p2p_fer = p2p[i * cfg.offsets.len() + o];
                let fer = match scheme {
                    SchemeId::Ts => p2p_fer,
                    _ => fer_estimate(&recs.iter().map(|r| r.uplink_frame_error).collect::<Vec<_>>()),
                };
                let ber = ber_estimate(&recs.iter().map(|r| (r.xor_bit_errors, r.total_bits)).collect::<Vec<_>>());
                let raw_ber = (scheme == SchemeId::Fpnc).then(|| {
                    ber_estimate(&recs.iter().map(|r| (r.coded_bit_errors, r.coded_total_bits)).collect::<Vec<_>>())
                });
                rows.push(SweepRow {
                    scheme,
                    snr_db,
                    offset,
                    trials: recs.len(),
                    fer,
                    ber,
                    raw_ber,
                    p2p_fer,
                    throughput: throughput(scheme, fer.rate, p2p_fer.rate)?,
                });
            }
        }
    }
    Ok(rows)
}
