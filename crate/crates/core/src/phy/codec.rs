//! Rate-1/2, constraint-length-7 convolutional code (generators 133/171 octal)
//! with zero-tail termination, and its hard-decision Viterbi decoder.

use super::bits::{BitRole, BitVector};
use crate::error::{Error, Result};

pub const CONSTRAINT_LEN: usize = 7;
pub const TAIL_BITS: usize = CONSTRAINT_LEN - 1;
pub const G0: u32 = 0o133;
pub const G1: u32 = 0o171;

const N_STATES: usize = 1 << TAIL_BITS;

// The register holds the newest bit in bit 6 and the state (six previous bits)
// below it; the state after the step is `reg >> 1`.
#[inline]
fn branch_output(reg: u32) -> (u8, u8) {
    (
        ((reg & G0).count_ones() & 1) as u8,
        ((reg & G1).count_ones() & 1) as u8,
    )
}

/// Coded length for a message of `msg_len` bits.
pub fn coded_len(msg_len: usize) -> usize {
    2 * (msg_len + TAIL_BITS)
}

/// Encodes raw `0/1` bits, appending the zero tail.
pub fn encode_bits(msg: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(coded_len(msg.len()));
    let mut state = 0u32;
    for &b in msg.iter().chain(std::iter::repeat_n(&0u8, TAIL_BITS)) {
        let reg = (u32::from(b) << TAIL_BITS) | state;
        let (c0, c1) = branch_output(reg);
        out.push(c0);
        out.push(c1);
        state = reg >> 1;
    }
    out
}

pub fn conv_encode(src: &BitVector) -> BitVector {
    BitVector::new(encode_bits(&src.bits), BitRole::Coded)
}

/// Hard-decision maximum-likelihood decode under the Hamming metric.
///
/// The returned message excludes the tail; the trellis is forced to end in
/// state zero.
pub fn decode_bits(coded: &[u8]) -> Result<Vec<u8>> {
    if !coded.len().is_multiple_of(2) || coded.len() < 2 * TAIL_BITS {
        return Err(Error::Config(format!(
            "coded length {} is not a terminated rate-1/2 codeword",
            coded.len()
        )));
    }
    let steps = coded.len() / 2;
    let msg_len = steps - TAIL_BITS;

    // outputs[reg] packed as c0<<1 | c1
    let outputs: Vec<u8> = (0..(N_STATES as u32) << 1)
        .map(|reg| {
            let (c0, c1) = branch_output(reg);
            (c0 << 1) | c1
        })
        .collect();

    const INF: u32 = u32::MAX / 2;
    let mut metric = vec![INF; N_STATES];
    metric[0] = 0;
    let mut next = vec![INF; N_STATES];
    // survivors[t][ns] = register value that entered state ns at step t
    let mut survivors = vec![0u8; steps * N_STATES];

    for t in 0..steps {
        let rx = (coded[2 * t] << 1) | coded[2 * t + 1];
        for ns in 0..N_STATES {
            // ns = reg >> 1, so reg = ns << 1 | lsb, and the input bit is ns >> 5.
            let mut best = INF;
            let mut best_reg = 0u8;
            for lsb in 0..2 {
                let reg = (ns << 1) | lsb;
                let prev = reg & (N_STATES - 1);
                let m = metric[prev];
                if m >= INF {
                    continue;
                }
                let cand = m + (outputs[reg] ^ rx).count_ones();
                if cand < best {
                    best = cand;
                    best_reg = reg as u8;
                }
            }
            next[ns] = best;
            survivors[t * N_STATES + ns] = best_reg;
        }
        std::mem::swap(&mut metric, &mut next);
    }

    let mut decoded = vec![0u8; steps];
    let mut state = 0usize;
    for t in (0..steps).rev() {
        let reg = survivors[t * N_STATES + state] as usize;
        decoded[t] = (reg >> TAIL_BITS) as u8;
        state = reg & (N_STATES - 1);
    }
    decoded.truncate(msg_len);
    Ok(decoded)
}

pub fn viterbi_decode(coded: &BitVector) -> Result<BitVector> {
    let role = if coded.role == BitRole::Xor {
        BitRole::Xor
    } else {
        BitRole::Source
    };
    Ok(BitVector::new(decode_bits(&coded.bits)?, role))
}
