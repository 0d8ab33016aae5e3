//! Error-rate estimates with 95% confidence intervals.

use serde::{Deserialize, Serialize};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl RateEstimate {
    pub fn overlaps(&self, other: &RateEstimate) -> bool {
        self.ci_low <= other.ci_high && other.ci_low <= self.ci_high
    }
}

/// Wilson score interval for `successes` out of `n` (real-valued so that
/// effective sample sizes can be used). An empty sample gives `[0, 1]`.
pub fn wilson(successes: f64, n: f64, z: f64) -> (f64, f64) {
    if n <= 0.0 {
        return (0.0, 1.0);
    }
    let p = successes / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // The bounds are exact at the edges; floating-point residue is dropped.
    let lo = if successes <= 0.0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes >= n { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Frame error rate with its Wilson interval.
pub fn fer_estimate(errors: &[bool]) -> RateEstimate {
    let n = errors.len() as f64;
    let k = errors.iter().filter(|&&e| e).count() as f64;
    let (ci_low, ci_high) = wilson(k, n, Z95);
    RateEstimate {
        rate: if n > 0.0 { k / n } else { 0.0 },
        ci_low,
        ci_high,
    }
}

/// Bit error rate pooled over trials, with a Wilson interval on the
/// effective number of bits.
///
/// Bit errors are clustered by frame (a lost frame carries many), so the
/// binomial count of all bits overstates the information in the sample. The
/// effective size is `p(1−p) / Var(p̂)`, with `Var(p̂)` taken from the
/// between-trial spread of per-trial error fractions, capped at the raw bit
/// count.
pub fn ber_estimate(per_trial: &[(usize, usize)]) -> RateEstimate {
    let errors: usize = per_trial.iter().map(|t| t.0).sum();
    let bits: usize = per_trial.iter().map(|t| t.1).sum();
    if bits == 0 {
        return RateEstimate {
            rate: 0.0,
            ci_low: 0.0,
            ci_high: 1.0,
        };
    }
    let p = errors as f64 / bits as f64;
    let t = per_trial.len() as f64;
    let mean_bits = bits as f64 / t;
    // Ratio-estimator variance of p̂ over clusters.
    let var = if per_trial.len() > 1 {
        per_trial
            .iter()
            .map(|&(e, n)| {
                let r = e as f64 - p * n as f64;
                r * r
            })
            .sum::<f64>()
            / (t * (t - 1.0) * mean_bits * mean_bits)
    } else {
        0.0
    };
    let n_eff = if var > 0.0 {
        (p * (1.0 - p) / var).clamp(1.0, bits as f64)
    } else {
        bits as f64
    };
    let (ci_low, ci_high) = wilson(p * n_eff, n_eff, Z95);
    RateEstimate {
        rate: p,
        ci_low,
        ci_high,
    }
}
