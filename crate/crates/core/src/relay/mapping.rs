//! Per-subcarrier XOR mapping of the superimposed BPSK symbols.
//!
//! The four noiseless points are `U = s_A·H_A + s_B·H_B` with `s ∈ {±1}`.
//! Same-sign pairs (XOR bit 0) map to `+1`, mixed-sign pairs to `-1`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MappingRule {
    /// Nearest constellation point.
    #[default]
    LogMax,
    /// Likelihood sums over both hypotheses.
    Exact,
}

/// `(s_A, s_B)` rows of the mapping table; the output is `s_A·s_B`. Same-sign
/// rows come first so that ties resolve to +1.
const TABLE: [(f64, f64); 4] = [(1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0)];

/// Nearest of `±(H_A+H_B)` (→ +1) and `±(H_A−H_B)` (→ −1). Ties go to +1.
pub fn map_logmax(y: Complex64, ha: Complex64, hb: Complex64) -> i8 {
    let mut best = (f64::INFINITY, 1);
    for (sa, sb) in TABLE {
        let d = (y - (ha * sa + hb * sb)).norm_sqr();
        if d < best.0 {
            best = (d, (sa * sb) as i8);
        }
    }
    best.1
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Log-likelihood ratio of XOR = 0 versus XOR = 1 for complex Gaussian noise
/// of variance `noise_var` on this subcarrier.
pub fn xor_llr(y: Complex64, ha: Complex64, hb: Complex64, noise_var: f64) -> f64 {
    let ll = |u: Complex64| -(y - u).norm_sqr() / noise_var;
    let same = log_sum_exp(ll(ha + hb), ll(-(ha + hb)));
    let mixed = log_sum_exp(ll(ha - hb), ll(-(ha - hb)));
    same - mixed
}

/// Exact likelihood comparison; falls back to the nearest-point rule when
/// the noise variance is zero. Ties go to +1.
pub fn map_exact(y: Complex64, ha: Complex64, hb: Complex64, noise_var: f64) -> i8 {
    if noise_var.is_nan() || noise_var <= 0.0 {
        return map_logmax(y, ha, hb);
    }
    if xor_llr(y, ha, hb, noise_var) >= 0.0 {
        1
    } else {
        -1
    }
}

pub fn map_symbol(y: Complex64, ha: Complex64, hb: Complex64, rule: MappingRule, noise_var: f64) -> i8 {
    match rule {
        MappingRule::LogMax => map_logmax(y, ha, hb),
        MappingRule::Exact => map_exact(y, ha, hb, noise_var),
    }
}

/// XOR symbol `+1`/`-1` to coded bit `0`/`1`.
pub fn symbol_to_bit(s: i8) -> u8 {
    u8::from(s < 0)
}
