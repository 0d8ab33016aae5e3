//! LTS channel estimation and per-symbol pilot tracking.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::phy::preamble::PilotMap;
use crate::phy::{NodeRole, OfdmParams};
use crate::signal::{dft, Sample, Spectrum};

/// Per-subcarrier gains for one uplink, in FFT bin order; bins outside the
/// occupied band are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelEstimate {
    pub gains: Vec<Complex64>,
    pub node: NodeRole,
    /// Data symbol the gains apply to; `None` for the LTS estimate itself.
    pub symbol_index: Option<usize>,
}

impl ChannelEstimate {
    /// Gain on signed subcarrier `k`.
    pub fn at(&self, k: i32) -> Complex64 {
        let n = self.gains.len() as i32;
        self.gains[k.rem_euclid(n) as usize]
    }

    pub fn is_finite(&self) -> bool {
        self.gains.iter().all(|g| g.re.is_finite() && g.im.is_finite())
    }
}

/// Where the relay takes each node's two LTS units from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LtsWindows {
    /// Start of A's first unit; its second follows `N` samples later.
    pub a: usize,
    /// Start of B's first unit.
    pub b: usize,
}

impl LtsWindows {
    /// Both nodes' windows anchored at A's boundary, so that B's arrival
    /// offset shows up as a linear phase in its estimate just as it does in
    /// the data symbols.
    pub fn anchored(lts_boundary_a: usize, params: &OfdmParams) -> Self {
        Self {
            a: lts_boundary_a + params.cp_len,
            b: lts_boundary_a + params.lts_slot_len() + params.cp_len,
        }
    }
}

/// LTS estimate plus the raw per-unit estimates it averages.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitEstimates {
    pub estimate: ChannelEstimate,
    pub first: Vec<Complex64>,
    pub second: Vec<Complex64>,
}

fn unit_estimate(unit: &[Sample], lts_freq: &Spectrum, params: &OfdmParams) -> Result<Vec<Complex64>> {
    let y = dft(unit, params.n_fft)?;
    let mut h = vec![Complex64::new(0.0, 0.0); params.n_fft];
    for &k in &params.occupied_band {
        let b = params.bin(k);
        h[b] = y.bins[b] / lts_freq.bins[b];
    }
    Ok(h)
}

/// Average of the two units' `DFT / X_LTS` on the occupied band.
pub fn estimate_from_units(
    y: &[Sample],
    start: usize,
    lts_freq: &Spectrum,
    params: &OfdmParams,
    node: NodeRole,
) -> Result<UnitEstimates> {
    let n = params.n_fft;
    let first = unit_estimate(&y[start..start + n], lts_freq, params)?;
    let second = unit_estimate(&y[start + n..start + 2 * n], lts_freq, params)?;
    let gains = first.iter().zip(&second).map(|(a, b)| 0.5 * (a + b)).collect();
    Ok(UnitEstimates {
        estimate: ChannelEstimate {
            gains,
            node,
            symbol_index: None,
        },
        first,
        second,
    })
}

pub fn estimate_channels(
    y: &[Sample],
    windows: LtsWindows,
    lts_freq: &Spectrum,
    params: &OfdmParams,
) -> Result<(ChannelEstimate, ChannelEstimate)> {
    let a = estimate_from_units(y, windows.a, lts_freq, params, NodeRole::A)?;
    let b = estimate_from_units(y, windows.b, lts_freq, params, NodeRole::B)?;
    Ok((a.estimate, b.estimate))
}

/// Frequency-domain noise variance per subcarrier, `N·σ²`, from the
/// disagreement between the two units: `E|Ĥ₁ - Ĥ₂|² = 2Nσ²` on each tone.
pub fn noise_from_units(units: &[&UnitEstimates], params: &OfdmParams) -> f64 {
    let mut acc = 0.0;
    let mut count = 0usize;
    for u in units {
        for &k in &params.occupied_band {
            let b = params.bin(k);
            acc += (u.first[b] - u.second[b]).norm_sqr();
            count += 1;
        }
    }
    acc / (2.0 * count as f64)
}

/// Refreshes `base` for data symbol `m` from this node's own pilots.
///
/// The ratio `Y[k]/(H̃[k]·P[k])` at the two pilot tones is fitted by the line
/// through both points in signed subcarrier index and applied to every
/// occupied tone.
pub fn track_channel(
    y_m: &Spectrum,
    base: &ChannelEstimate,
    pilots: &PilotMap,
    params: &OfdmParams,
    m: usize,
) -> ChannelEstimate {
    let own: Vec<(i32, Complex64)> = pilots
        .iter()
        .filter(|(_, v)| v.norm() > 0.0)
        .map(|(&k, &v)| (k, v))
        .collect();
    debug_assert_eq!(own.len(), 2, "each node owns two pilots");
    let ratio = |(k, p): (i32, Complex64)| {
        let h = base.at(k) * p;
        if h.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            y_m.bins[params.bin(k)] / h
        }
    };
    let (k1, k2) = (own[0].0, own[1].0);
    let (d1, d2) = (ratio(own[0]), ratio(own[1]));
    let slope = (d2 - d1) / f64::from(k2 - k1);
    let mut gains = vec![Complex64::new(0.0, 0.0); params.n_fft];
    for &k in &params.occupied_band {
        let delta = d1 + slope * f64::from(k - k1);
        gains[params.bin(k)] = base.at(k) * delta;
    }
    ChannelEstimate {
        gains,
        node: base.node,
        symbol_index: Some(m),
    }
}
