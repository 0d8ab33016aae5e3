//! Transmitter chain: codec, BPSK, training fields and frame assembly.

pub mod bits;
pub mod codec;
pub mod frame;
pub mod ofdm;
pub mod preamble;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bits::{bpsk_map, BitRole, BitVector};
pub use codec::{conv_encode, viterbi_decode, TAIL_BITS};
pub use frame::{build_frame, FrameLayout, NodeRole};
pub use preamble::{gen_lts, gen_pilots, gen_sts, PilotMap};

/// Highest signed subcarrier index carrying energy.
pub const BAND_EDGE: i32 = 26;
/// Number of STS units in the short training field.
pub const STS_UNITS: usize = 10;

/// OFDM numerology and subcarrier plan.
///
/// Subcarriers are addressed by signed index `k ∈ [-N/2, N/2)`; bin `k mod N`
/// holds it in a [`Spectrum`](crate::signal::Spectrum).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OfdmParams {
    pub n_fft: usize,
    pub cp_len: usize,
    pub n_data_subcarriers: usize,
    pub pilot_indices_a: [i32; 2],
    pub pilot_indices_b: [i32; 2],
    /// Data and pilot subcarriers, ascending.
    pub occupied_band: Vec<i32>,
}

impl Default for OfdmParams {
    fn default() -> Self {
        Self::new(64, 16).expect("default numerology is valid")
    }
}

impl OfdmParams {
    /// 802.11a-style plan (48 data tones, pilots at ±7 and ±21) for an
    /// `n_fft`-point transform with a `cp_len`-sample prefix.
    pub fn new(n_fft: usize, cp_len: usize) -> Result<Self> {
        if !n_fft.is_power_of_two() || n_fft < 64 {
            return Err(Error::Config(format!(
                "n_fft must be a power of two of at least 64, got {n_fft}"
            )));
        }
        if cp_len == 0 || cp_len > n_fft {
            return Err(Error::Config(format!(
                "cp_len must be in 1..={n_fft}, got {cp_len}"
            )));
        }
        let occupied_band: Vec<i32> = (-BAND_EDGE..=BAND_EDGE).filter(|&k| k != 0).collect();
        let params = Self {
            n_fft,
            cp_len,
            n_data_subcarriers: 48,
            pilot_indices_a: [-21, 7],
            pilot_indices_b: [-7, 21],
            occupied_band,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.pilot_indices_a;
        let b = self.pilot_indices_b;
        if a.iter().any(|k| b.contains(k)) {
            return Err(Error::Config("pilot sets of A and B overlap".into()));
        }
        if a.iter().chain(&b).any(|k| !self.occupied_band.contains(k)) {
            return Err(Error::Config("pilot outside the occupied band".into()));
        }
        if self.cp_len > self.n_fft {
            return Err(Error::Config("cp_len exceeds n_fft".into()));
        }
        if self.data_subcarriers().len() != self.n_data_subcarriers {
            return Err(Error::Config(format!(
                "occupied band leaves {} data subcarriers, expected {}",
                self.data_subcarriers().len(),
                self.n_data_subcarriers
            )));
        }
        Ok(())
    }

    /// FFT bin of signed subcarrier `k`.
    pub fn bin(&self, k: i32) -> usize {
        k.rem_euclid(self.n_fft as i32) as usize
    }

    pub fn all_pilots(&self) -> [i32; 4] {
        let [a0, a1] = self.pilot_indices_a;
        let [b0, b1] = self.pilot_indices_b;
        let mut p = [a0, a1, b0, b1];
        p.sort_unstable();
        p
    }

    /// Data subcarriers in ascending signed order.
    pub fn data_subcarriers(&self) -> Vec<i32> {
        let pilots = self.all_pilots();
        self.occupied_band
            .iter()
            .copied()
            .filter(|k| !pilots.contains(k))
            .collect()
    }

    pub fn symbol_len(&self) -> usize {
        self.n_fft + self.cp_len
    }

    pub fn sts_unit_len(&self) -> usize {
        self.n_fft / 4
    }

    pub fn sts_len(&self) -> usize {
        STS_UNITS * self.sts_unit_len()
    }

    /// One node's LTS slot: CP followed by two units.
    pub fn lts_slot_len(&self) -> usize {
        self.cp_len + 2 * self.n_fft
    }

    /// Both slots of the doubled LTS field.
    pub fn lts_field_len(&self) -> usize {
        2 * self.lts_slot_len()
    }

    pub fn preamble_len(&self) -> usize {
        self.sts_len() + self.lts_field_len()
    }

    /// Coded bits carried by one data symbol.
    pub fn coded_bits_per_symbol(&self) -> usize {
        self.n_data_subcarriers
    }

    /// Mean per-sample power of a single-user data symbol (data tones plus
    /// that node's two pilots, all unit magnitude).
    pub fn reference_power(&self) -> f64 {
        let tones = (self.n_data_subcarriers + 2) as f64;
        tones / (self.n_fft * self.n_fft) as f64
    }
}
