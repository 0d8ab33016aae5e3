//! Per-node CFO estimation from the repeated LTS units, and compensation.

use serde::{Deserialize, Serialize};

use crate::channel::rotate;
use crate::rng::SimRng;
use crate::signal::{Sample, TimeSignal};

/// How the per-sample phase estimates of one node are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CfoEstimator {
    #[default]
    Median,
    Mean,
}

/// Which estimate the relay removes from the whole receive window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CfoStrategy {
    /// Average of the two nodes' estimates.
    #[default]
    Mean,
    AOnly,
    BOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CfoEstimate {
    pub phi_hat_a: f64,
    pub phi_hat_b: f64,
    pub phi_tilde: f64,
}

impl CfoEstimate {
    pub fn new(phi_hat_a: f64, phi_hat_b: f64) -> Self {
        Self {
            phi_hat_a,
            phi_hat_b,
            phi_tilde: 0.5 * (phi_hat_a + phi_hat_b),
        }
    }

    pub fn for_strategy(&self, strategy: CfoStrategy) -> f64 {
        match strategy {
            CfoStrategy::Mean => self.phi_tilde,
            CfoStrategy::AOnly => self.phi_hat_a,
            CfoStrategy::BOnly => self.phi_hat_b,
        }
    }
}

/// `angle(y*[n]·y[n+N]) / N` for `n = 0..N`, over a `2N`-sample window.
pub fn phase_samples(y_lts: &[Sample], n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (y_lts[i].conj() * y_lts[i + n]).arg() / n as f64)
        .collect()
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

pub fn combine(values: &[f64], estimator: CfoEstimator) -> f64 {
    match estimator {
        CfoEstimator::Median => median(values),
        CfoEstimator::Mean => values.iter().sum::<f64>() / values.len() as f64,
    }
}

/// CFO of the node whose two identical LTS units fill `y_lts` (length `2N`).
pub fn estimate_cfo_one(y_lts: &[Sample], n: usize, estimator: CfoEstimator) -> f64 {
    assert!(y_lts.len() >= 2 * n, "window shorter than two LTS units");
    combine(&phase_samples(y_lts, n), estimator)
}

/// Fault injection for the phase detector: in each node's window, `count`
/// of the `N` raw angles `angle(y*[n]·y[n+N])` are replaced by
/// `±magnitude` (one random sign per window, so the glitches are coherent).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngleOutliers {
    pub count: usize,
    pub magnitude: f64,
}

impl AngleOutliers {
    /// Overwrites entries of `phase` (already divided by `n`) in place.
    pub fn inject(&self, phase: &mut [f64], n: usize, rng: &mut SimRng) {
        let sign = if rng.uniform() < 0.5 { -1.0 } else { 1.0 };
        let value = sign * self.magnitude / n as f64;
        let mut idx: Vec<usize> = (0..phase.len()).collect();
        let count = self.count.min(phase.len());
        for i in 0..count {
            let j = rng.int_in(i, phase.len() - 1);
            idx.swap(i, j);
            phase[idx[i]] = value;
        }
    }
}

/// Like [`estimate_cfo_one`], with phase-detector glitches injected first.
pub fn estimate_cfo_corrupted(
    y_lts: &[Sample],
    n: usize,
    estimator: CfoEstimator,
    outliers: &AngleOutliers,
    rng: &mut SimRng,
) -> f64 {
    assert!(y_lts.len() >= 2 * n, "window shorter than two LTS units");
    let mut phase = phase_samples(y_lts, n);
    outliers.inject(&mut phase, n, rng);
    combine(&phase, estimator)
}

/// Removes `e^{jnφ}` with `φ` chosen by `strategy`, indexing `n` from the
/// receive window origin.
pub fn compensate_cfo(y: &TimeSignal, strategy: CfoStrategy, est: &CfoEstimate) -> TimeSignal {
    rotate(y, -est.for_strategy(strategy))
}
