//! Frame timing from the short training field, refined on the LTS.
//!
//! The STS correlator finds up to twenty peaks (ten per user). The last two
//! mark the ends of A's and B's short training fields and hence, coarsely,
//! the start of each node's LTS slot. Each coarse boundary is then pinned to
//! the earliest strong arrival of that node's first LTS unit.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::phy::preamble::lts_unit;
use crate::phy::OfdmParams;
use crate::signal::{Sample, TimeSignal};

/// Minimum normalized correlation for a peak.
pub const PEAK_THRESHOLD: f64 = 0.5;
/// Half-width of the local-maximum neighborhood.
pub const PEAK_NEIGHBORHOOD: usize = 4;
pub const PEAK_CONFIRM_JITTER: usize = 2;
/// Fraction of the strongest LTS correlation that marks the first arrival.
pub const FIRST_PATH_FRACTION: f64 = 0.5;
/// Normalized LTS correlation that counts as a frame when the STS gave too
/// few peaks.
pub const LTS_DETECT_THRESHOLD: f64 = 0.5;
/// How far before the coarse A boundary the LTS search starts.
const REFINE_EARLY: usize = 20;
/// How far past the nominal position the LTS search extends.
const REFINE_LATE: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyncResult {
    pub peak_indices: Vec<usize>,
    /// Start of A's LTS slot (equivalently, of the whole LTS field as A sees it).
    pub lts_boundary_a: usize,
    /// Start of the LTS field in B's own timing.
    pub lts_boundary_b: usize,
    pub detected_offset: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SyncFailure {
    TooFewPeaks(usize),
    /// Training or data windows would run past the received samples.
    Truncated,
}

/// How the receiver obtains frame timing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimingMode {
    #[default]
    Estimated,
    /// Ground-truth boundaries: A's frame starts at sample 0 and B's `offset`
    /// samples later.
    Genie { offset: usize },
}

/// `|Σ sts*[i]·y[n+i]| / sqrt(Σ|sts[i]|²·Σ|y[n+i]|²)`; 0 if the window has no energy
/// or runs past the end of `y`.
pub fn sts_correlation(y: &[Sample], sts_unit: &[Sample], n: usize) -> f64 {
    let len = sts_unit.len();
    if n + len > y.len() {
        return 0.0;
    }
    let window = &y[n..n + len];
    let num: Complex64 = sts_unit.iter().zip(window).map(|(s, v)| s.conj() * v).sum();
    let e_ref: f64 = sts_unit.iter().map(|s| s.norm_sqr()).sum();
    let e_y: f64 = window.iter().map(|s| s.norm_sqr()).sum();
    let den = (e_ref * e_y).sqrt();
    if den == 0.0 {
        0.0
    } else {
        num.norm() / den
    }
}

/// Local maxima of the STS correlation at or above [`PEAK_THRESHOLD`] over the
/// window where either user's STS can lie. Ties go to the earliest index.
///
/// A peak past the first unit must also see a correlation above threshold
/// one unit earlier (give or take [`PEAK_CONFIRM_JITTER`] samples, since
/// noise and multipath move the maximum): real peaks come in runs spaced by
/// the unit length, while the sidelobe where the window straddles the STS/LTS
/// junction does not.
pub fn find_peaks(y: &[Sample], sts_unit: &[Sample], params: &OfdmParams) -> Vec<usize> {
    let unit = sts_unit.len();
    let last = params.sts_len() - unit + params.cp_len;
    let z: Vec<f64> = (0..=last + PEAK_NEIGHBORHOOD)
        .map(|n| sts_correlation(y, sts_unit, n))
        .collect();
    (0..=last)
        .filter(|&n| {
            z[n] >= PEAK_THRESHOLD
                && (n.saturating_sub(PEAK_NEIGHBORHOOD)..n).all(|m| z[n] > z[m])
                && (n + 1..=n + PEAK_NEIGHBORHOOD).all(|m| z[n] >= z[m])
                && (n < unit || {
                    let back = n - unit;
                    let lo = back.saturating_sub(PEAK_CONFIRM_JITTER);
                    z[lo..=back + PEAK_CONFIRM_JITTER].iter().any(|&v| v >= PEAK_THRESHOLD)
                })
        })
        .collect()
}

/// Coarse STS timing: boundaries sit one unit after the last two peaks.
pub fn sts_sync(
    y: &TimeSignal,
    sts_unit: &[Sample],
    params: &OfdmParams,
) -> Result<SyncResult, SyncFailure> {
    let peaks = find_peaks(&y.samples, sts_unit, params);
    if peaks.len() < 10 {
        return Err(SyncFailure::TooFewPeaks(peaks.len()));
    }
    let unit = sts_unit.len();
    let last = peaks[peaks.len() - 1];
    let second = if peaks.len() == 10 {
        last
    } else {
        peaks[peaks.len() - 2]
    };
    Ok(SyncResult {
        lts_boundary_a: second + unit,
        lts_boundary_b: last + unit,
        detected_offset: last - second,
        peak_indices: peaks,
    })
}

fn lts_correlation_normalized(y: &[Sample], lts: &[Sample], n: usize) -> f64 {
    if n + lts.len() > y.len() {
        return 0.0;
    }
    let e_ref: f64 = lts.iter().map(|s| s.norm_sqr()).sum();
    let e_y: f64 = y[n..n + lts.len()].iter().map(|s| s.norm_sqr()).sum();
    let den = (e_ref * e_y).sqrt();
    if den == 0.0 {
        0.0
    } else {
        lts_correlation(y, lts, n) / den
    }
}

fn lts_correlation(y: &[Sample], lts: &[Sample], n: usize) -> f64 {
    if n + lts.len() > y.len() {
        return 0.0;
    }
    lts.iter()
        .zip(&y[n..n + lts.len()])
        .map(|(s, v)| s.conj() * v)
        .sum::<Complex64>()
        .norm()
}

/// First index in `range` whose LTS correlation reaches
/// [`FIRST_PATH_FRACTION`] of the strongest one in the range.
fn first_arrival(y: &[Sample], lts: &[Sample], range: std::ops::RangeInclusive<usize>) -> usize {
    let start = *range.start();
    let c: Vec<f64> = range.map(|n| lts_correlation(y, lts, n)).collect();
    let max = c.iter().copied().fold(0.0, f64::max);
    let i = c
        .iter()
        .position(|&v| v >= FIRST_PATH_FRACTION * max && v > 0.0)
        .unwrap_or(0);
    start + i
}

/// Pins both LTS boundaries to the first arrival of each node's first LTS
/// unit. A is searched around its coarse boundary; B in the window allowed by
/// an arrival offset of `0..=cp_len`.
pub fn refine_boundaries(y: &TimeSignal, coarse: SyncResult, params: &OfdmParams) -> SyncResult {
    let lts = lts_unit(params).samples;
    let c = params.cp_len;
    let nominal_a = coarse.lts_boundary_a + c;
    // Trailing peaks can drown: B's last unit overlaps A's LTS cyclic prefix,
    // and under multipath A's own peaks may all fall below threshold. The
    // coarse boundary is then early by up to one unit plus the offset, so the
    // search reaches that far past the last peak.
    let latest_a = coarse.lts_boundary_b + params.sts_unit_len() + 2 * c;
    let a_unit = first_arrival(
        &y.samples,
        &lts,
        nominal_a.saturating_sub(REFINE_EARLY)..=latest_a + REFINE_LATE,
    );
    let lts_boundary_a = a_unit.saturating_sub(c);

    // B's first unit starts one slot plus one CP after its field start.
    let b_nominal = lts_boundary_a + params.lts_slot_len() + c;
    let b_unit = first_arrival(
        &y.samples,
        &lts,
        b_nominal.saturating_sub(2)..=b_nominal + c + REFINE_LATE,
    );
    let lts_boundary_b = b_unit
        .saturating_sub(params.lts_slot_len() + c)
        .max(lts_boundary_a);
    SyncResult {
        detected_offset: lts_boundary_b - lts_boundary_a,
        lts_boundary_a,
        lts_boundary_b,
        peak_indices: coarse.peak_indices,
    }
}

/// Single-user timing: coarse from the last STS peak, refined on the LTS.
pub fn sync_single(y: &TimeSignal, sts_unit: &[Sample], params: &OfdmParams) -> Result<SyncResult, SyncFailure> {
    let peaks = find_peaks(&y.samples, sts_unit, params);
    if peaks.len() < 10 {
        return Err(SyncFailure::TooFewPeaks(peaks.len()));
    }
    let last = peaks[peaks.len() - 1];
    let nominal = last + sts_unit.len() + params.cp_len;
    let lts = lts_unit(params).samples;
    let unit = first_arrival(
        &y.samples,
        &lts,
        nominal.saturating_sub(REFINE_EARLY)..=nominal + REFINE_LATE,
    );
    let b = unit.saturating_sub(params.cp_len);
    Ok(SyncResult {
        peak_indices: peaks,
        lts_boundary_a: b,
        lts_boundary_b: b,
        detected_offset: 0,
    })
}

/// Full two-user timing under `mode`.
pub fn synchronize(
    y: &TimeSignal,
    sts_unit: &[Sample],
    params: &OfdmParams,
    mode: TimingMode,
) -> Result<SyncResult, SyncFailure> {
    match mode {
        TimingMode::Genie { offset } => Ok(genie_sync(params, offset)),
        TimingMode::Estimated => match sts_sync(y, sts_unit, params) {
            Ok(coarse) => Ok(refine_boundaries(y, coarse, params)),
            Err(SyncFailure::TooFewPeaks(k)) => lts_fallback(y, params).ok_or(SyncFailure::TooFewPeaks(k)),
            Err(e) => Err(e),
        },
    }
}

/// Timing from the LTS alone, for when the two STS copies cancel (both nodes
/// send the same STS, so antiphase paths at coinciding units wipe out the
/// peaks). The LTS slots do not overlap and cannot cancel. The coarse window
/// is the whole range of admissible arrivals; a frame is declared only if
/// A's first LTS unit correlates above [`LTS_DETECT_THRESHOLD`] somewhere in it.
fn lts_fallback(y: &TimeSignal, params: &OfdmParams) -> Option<SyncResult> {
    let coarse = SyncResult {
        peak_indices: Vec::new(),
        lts_boundary_a: params.sts_len(),
        lts_boundary_b: params.sts_len() + params.cp_len,
        detected_offset: params.cp_len,
    };
    let lts = lts_unit(params).samples;
    let lo = coarse.lts_boundary_a + params.cp_len;
    let hi = coarse.lts_boundary_b + params.sts_unit_len() + 3 * params.cp_len;
    let best = (lo..=hi)
        .map(|n| lts_correlation_normalized(&y.samples, &lts, n))
        .fold(0.0, f64::max);
    (best >= LTS_DETECT_THRESHOLD).then(|| refine_boundaries(y, coarse, params))
}

pub fn genie_sync(params: &OfdmParams, offset: usize) -> SyncResult {
    let a = params.sts_len();
    SyncResult {
        peak_indices: Vec::new(),
        lts_boundary_a: a,
        lts_boundary_b: a + offset,
        detected_offset: offset,
    }
}
