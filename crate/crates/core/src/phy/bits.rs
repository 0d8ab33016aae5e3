use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What a bit sequence represents along the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BitRole {
    Source,
    Coded,
    Xor,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitVector {
    /// One bit per byte, each `0` or `1`.
    pub bits: Vec<u8>,
    pub role: BitRole,
}

impl BitVector {
    pub fn new(bits: Vec<u8>, role: BitRole) -> Self {
        debug_assert!(bits.iter().all(|&b| b <= 1));
        Self { bits, role }
    }

    pub fn source(bits: Vec<u8>) -> Self {
        Self::new(bits, BitRole::Source)
    }

    pub fn zeros(len: usize, role: BitRole) -> Self {
        Self::new(vec![0; len], role)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Elementwise XOR; the result is tagged [`BitRole::Xor`] unless both
    /// inputs are coded, in which case it stays coded.
    pub fn xor(&self, other: &BitVector) -> Result<BitVector> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        let role = if self.role == BitRole::Coded && other.role == BitRole::Coded {
            BitRole::Coded
        } else {
            BitRole::Xor
        };
        let bits = self.bits.iter().zip(&other.bits).map(|(a, b)| a ^ b).collect();
        Ok(BitVector::new(bits, role))
    }

    /// Positions where the two sequences differ, over the first `len` bits.
    pub fn hamming_prefix(&self, other: &BitVector, len: usize) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .take(len)
            .filter(|(a, b)| a != b)
            .count()
    }

    pub fn truncated(&self, len: usize) -> BitVector {
        BitVector::new(self.bits[..len.min(self.len())].to_vec(), self.role)
    }
}

/// Bit 0 maps to +1 and bit 1 to -1, so `s_A·s_B = +1` exactly when the XOR bit is 0.
pub fn bpsk_map(bits: &BitVector) -> Vec<f64> {
    bits.bits
        .iter()
        .map(|&b| if b == 0 { 1.0 } else { -1.0 })
        .collect()
}
