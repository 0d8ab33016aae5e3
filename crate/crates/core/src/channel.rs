//! Uplink superposition and point-to-point link impairments: multipath taps,
//! integer arrival offset, per-node CFO and AWGN.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phy::OfdmParams;
use crate::rng::SimRng;
use crate::signal::{add_awgn, dft, linear_convolve, Spectrum, TimeSignal};

/// Discrete-time impulse response `h[first_index + i] = taps[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelTaps {
    pub taps: Vec<Complex64>,
    pub first_index: usize,
}

impl ChannelTaps {
    pub fn new(taps: Vec<Complex64>, first_index: usize) -> Result<Self> {
        match taps.last() {
            None => Err(Error::Config("channel has no taps".into())),
            Some(t) if t.norm() == 0.0 => Err(Error::Config("last channel tap is zero".into())),
            Some(_) if taps.iter().any(|t| !t.re.is_finite() || !t.im.is_finite()) => {
                Err(Error::Config("channel tap is not finite".into()))
            }
            Some(_) => Ok(Self { taps, first_index }),
        }
    }

    /// Unit gain at index 0.
    pub fn identity() -> Self {
        Self::delay(0)
    }

    /// Unit gain at index `d`.
    pub fn delay(d: usize) -> Self {
        Self {
            taps: vec![Complex64::new(1.0, 0.0)],
            first_index: d,
        }
    }

    /// Builds from a dense response, moving leading zeros into `first_index`.
    pub fn from_dense(h: &[Complex64]) -> Result<Self> {
        let first = h.iter().position(|t| t.norm() != 0.0).unwrap_or(h.len());
        let last = h.iter().rposition(|t| t.norm() != 0.0).map_or(0, |i| i + 1);
        Self::new(h[first..last.max(first)].to_vec(), first)
    }

    /// Index of the last nonzero tap plus one.
    pub fn extent(&self) -> usize {
        self.first_index + self.taps.len()
    }

    pub fn shifted(&self, offset: usize) -> Self {
        Self {
            taps: self.taps.clone(),
            first_index: self.first_index + offset,
        }
    }

    pub fn dense(&self) -> Vec<Complex64> {
        let mut h = vec![Complex64::new(0.0, 0.0); self.first_index];
        h.extend_from_slice(&self.taps);
        h
    }

    /// `N`-point DFT of the zero-padded response.
    pub fn freq_response(&self, n_fft: usize) -> Result<Spectrum> {
        let mut h = self.dense();
        if h.len() > n_fft {
            return Err(Error::Config(format!(
                "channel extent {} exceeds transform size {n_fft}",
                h.len()
            )));
        }
        h.resize(n_fft, Complex64::new(0.0, 0.0));
        dft(&h, n_fft)
    }

    /// Total power `Σ|h|²`.
    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|t| t.norm_sqr()).sum()
    }
}

/// `max(D_A, D_B)` with both extents measured from A's first path.
pub fn delay_spread(taps_a: &ChannelTaps, taps_b: &ChannelTaps) -> usize {
    taps_a.extent().max(taps_b.extent())
}

/// Normalized CFO: radians of phase advance per sample.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CfoSpec {
    pub phi: f64,
}

impl CfoSpec {
    pub fn new(phi: f64) -> Self {
        Self { phi }
    }

    /// Largest magnitude allowed in configs, keeping the estimator's integer
    /// ambiguity at zero.
    pub fn cap(params: &OfdmParams) -> f64 {
        TAU * 0.2 / params.n_fft as f64
    }

    pub fn check(&self, params: &OfdmParams) -> Result<()> {
        if !self.phi.is_finite() || self.phi.abs() > Self::cap(params) {
            return Err(Error::Config(format!(
                "CFO {} rad/sample exceeds the cap {:.6}",
                self.phi,
                Self::cap(params)
            )));
        }
        Ok(())
    }
}

pub fn apply_channel(x: &TimeSignal, taps: &ChannelTaps) -> TimeSignal {
    let mut y = linear_convolve(&x.samples, &taps.dense()).expect("taps are non-empty");
    y.origin_index = x.origin_index;
    y
}

/// Multiplies the sample at absolute index `n` by `e^{jnφ}`.
pub fn rotate(x: &TimeSignal, phi: f64) -> TimeSignal {
    if phi == 0.0 {
        return x.clone();
    }
    let samples = x
        .samples
        .iter()
        .enumerate()
        .map(|(i, &s)| s * Complex64::from_polar(1.0, phi * (x.origin_index + i as i64) as f64))
        .collect();
    TimeSignal {
        samples,
        origin_index: x.origin_index,
    }
}

pub fn apply_cfo(x: &TimeSignal, cfo: CfoSpec) -> TimeSignal {
    rotate(x, cfo.phi)
}

/// Sparse high-amplitude bursts: each sample independently, with probability
/// `rate`, gains `amplitude·e^{jθ}` with uniform `θ`. With `until` set, only
/// samples before that index are exposed (an interferer that overlaps the
/// training fields but not the payload).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpulseNoise {
    pub rate: f64,
    pub amplitude: f64,
    pub until: Option<usize>,
}

impl ImpulseNoise {
    pub fn apply(&self, x: &mut TimeSignal, rng: &mut SimRng) {
        let end = self.until.unwrap_or(usize::MAX).min(x.samples.len());
        for s in x.samples[..end].iter_mut() {
            if rng.uniform() < self.rate {
                *s += Complex64::from_polar(self.amplitude, rng.phase());
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UplinkScenario {
    pub taps_a: ChannelTaps,
    /// B's response relative to its own arrival; `offset_b` is added on top.
    pub taps_b: ChannelTaps,
    pub offset_b: usize,
    pub cfo_a: CfoSpec,
    pub cfo_b: CfoSpec,
    pub noise_variance: f64,
    pub impulse: Option<ImpulseNoise>,
}

impl UplinkScenario {
    /// Noiseless, CFO-free scenario.
    pub fn clean(taps_a: ChannelTaps, taps_b: ChannelTaps, offset_b: usize) -> Self {
        Self {
            taps_a,
            taps_b,
            offset_b,
            cfo_a: CfoSpec::default(),
            cfo_b: CfoSpec::default(),
            noise_variance: 0.0,
            impulse: None,
        }
    }

    /// B's taps with the arrival offset folded in.
    pub fn effective_taps_b(&self) -> ChannelTaps {
        self.taps_b.shifted(self.offset_b)
    }

    pub fn delay_spread(&self) -> usize {
        delay_spread(&self.taps_a, &self.effective_taps_b())
    }

    /// Whether the combined delay spread fits within the cyclic prefix.
    pub fn within_cp(&self, params: &OfdmParams) -> bool {
        self.delay_spread() <= params.cp_len
    }
}

fn add_into(acc: &mut Vec<Complex64>, x: &[Complex64]) {
    if acc.len() < x.len() {
        acc.resize(x.len(), Complex64::new(0.0, 0.0));
    }
    for (a, &v) in acc.iter_mut().zip(x) {
        *a += v;
    }
}

/// Relay receive window: both uplinks through their channels and CFOs,
/// summed, plus noise. Index 0 is the first sample of A's frame.
pub fn superpose_uplink(
    frame_a: &TimeSignal,
    frame_b: &TimeSignal,
    scenario: &UplinkScenario,
    rng: &mut SimRng,
) -> Result<TimeSignal> {
    let ya = apply_cfo(&apply_channel(frame_a, &scenario.taps_a), scenario.cfo_a);
    let yb = apply_cfo(
        &apply_channel(frame_b, &scenario.effective_taps_b()),
        scenario.cfo_b,
    );
    let mut sum = ya.samples;
    add_into(&mut sum, &yb.samples);
    let mut y = add_awgn(&TimeSignal::new(sum), scenario.noise_variance, rng)?;
    if let Some(imp) = scenario.impulse {
        imp.apply(&mut y, rng);
    }
    Ok(y)
}

/// A single point-to-point link (downlinks and one-at-a-time uplinks).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkScenario {
    pub taps: ChannelTaps,
    pub cfo: CfoSpec,
    pub noise_variance: f64,
}

pub fn transmit_p2p(frame: &TimeSignal, link: &LinkScenario, rng: &mut SimRng) -> Result<TimeSignal> {
    let y = apply_cfo(&apply_channel(frame, &link.taps), link.cfo);
    add_awgn(&y, link.noise_variance, rng)
}

/// `σ²` giving `snr_db` relative to the single-user data-symbol power.
pub fn noise_variance_for_snr(snr_db: f64, params: &OfdmParams) -> f64 {
    params.reference_power() / 10f64.powf(snr_db / 10.0)
}

/// How per-trial channel responses are drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelModel {
    /// Unit gain, no multipath.
    Flat,
    /// The same responses every trial.
    Fixed { taps: ChannelTaps },
    /// `paths` taps at consecutive indices: the first has unit magnitude and
    /// uniform phase, tap `l` is complex Gaussian with power
    /// `10^(-l·decay_db/10)`.
    RandomMultipath { paths: usize, decay_db: f64 },
}

impl ChannelModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            ChannelModel::RandomMultipath { paths, decay_db } => {
                if *paths == 0 || !decay_db.is_finite() {
                    return Err(Error::Config(
                        "random multipath needs at least one path and a finite decay".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Largest extent any draw can have.
    pub fn max_extent(&self) -> usize {
        match self {
            ChannelModel::Flat => 1,
            ChannelModel::Fixed { taps } => taps.extent(),
            ChannelModel::RandomMultipath { paths, .. } => *paths,
        }
    }

    pub fn draw(&self, rng: &mut SimRng) -> ChannelTaps {
        match self {
            ChannelModel::Flat => ChannelTaps::identity(),
            ChannelModel::Fixed { taps } => taps.clone(),
            ChannelModel::RandomMultipath { paths, decay_db } => {
                let mut taps = vec![Complex64::from_polar(1.0, rng.phase())];
                for l in 1..*paths {
                    let power = 10f64.powf(-(l as f64) * decay_db / 10.0);
                    taps.push(rng.complex_gaussian(power));
                }
                ChannelTaps { taps, first_index: 0 }
            }
        }
    }
}
