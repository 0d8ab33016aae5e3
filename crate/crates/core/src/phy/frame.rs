use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::bits::{bpsk_map, BitRole, BitVector};
use super::codec::{conv_encode, TAIL_BITS};
use super::ofdm::{assemble_symbol, modulate};
use super::preamble::{gen_lts, gen_pilots, gen_sts};
use super::OfdmParams;
use crate::error::{Error, Result};
use crate::signal::TimeSignal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeRole {
    A,
    B,
    Relay,
}

impl NodeRole {
    /// Role whose LTS slot and pilots this node transmits with. The relay's
    /// point-to-point frames borrow A's.
    pub fn framing_role(self) -> NodeRole {
        match self {
            NodeRole::Relay => NodeRole::A,
            r => r,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolSpan {
    pub cp: Range<usize>,
    pub payload: Range<usize>,
}

/// Sample-index map of one frame, relative to its first sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameLayout {
    pub sts_span: Range<usize>,
    /// First LTS slot (A's).
    pub lts_span_a: Range<usize>,
    /// Second LTS slot (B's).
    pub lts_span_b: Range<usize>,
    pub data_symbol_spans: Vec<SymbolSpan>,
    pub total_len: usize,
    /// Message bits supplied by the caller.
    pub payload_bits: usize,
    /// Message bits after zero padding, before the tail.
    pub padded_bits: usize,
}

/// Smallest length `>= len` whose terminated codeword fills whole symbols.
pub fn padded_len(len: usize, params: &OfdmParams) -> usize {
    let per_symbol = params.coded_bits_per_symbol() / 2;
    (len + TAIL_BITS).div_ceil(per_symbol) * per_symbol - TAIL_BITS
}

impl FrameLayout {
    pub fn new(params: &OfdmParams, payload_bits: usize) -> Result<Self> {
        if payload_bits == 0 {
            return Err(Error::Config("empty payload".into()));
        }
        let padded_bits = padded_len(payload_bits, params);
        let n_symbols = 2 * (padded_bits + TAIL_BITS) / params.coded_bits_per_symbol();
        let sts_end = params.sts_len();
        let slot = params.lts_slot_len();
        let data_start = params.preamble_len();
        let data_symbol_spans = (0..n_symbols)
            .map(|m| {
                let s = data_start + m * params.symbol_len();
                SymbolSpan {
                    cp: s..s + params.cp_len,
                    payload: s + params.cp_len..s + params.symbol_len(),
                }
            })
            .collect();
        Ok(Self {
            sts_span: 0..sts_end,
            lts_span_a: sts_end..sts_end + slot,
            lts_span_b: sts_end + slot..data_start,
            data_symbol_spans,
            total_len: data_start + n_symbols * params.symbol_len(),
            payload_bits,
            padded_bits,
        })
    }

    pub fn n_symbols(&self) -> usize {
        self.data_symbol_spans.len()
    }

    /// Start of the LTS field; every later span is a fixed offset from it.
    pub fn lts_start(&self) -> usize {
        self.lts_span_a.start
    }
}

/// Builds `STS ∥ LTS(role) ∥ data` for `payload`, zero-padding the message
/// so the codeword fills an integer number of data symbols.
pub fn build_frame(
    role: NodeRole,
    payload: &BitVector,
    params: &OfdmParams,
) -> Result<(TimeSignal, FrameLayout)> {
    let layout = FrameLayout::new(params, payload.len())?;
    let mut msg = payload.bits.clone();
    msg.resize(layout.padded_bits, 0);
    let coded = conv_encode(&BitVector::new(msg, BitRole::Source));
    let symbols = bpsk_map(&coded);

    let framing = role.framing_role();
    let mut samples = gen_sts(params).samples;
    samples.extend(gen_lts(framing, params)?.samples);
    for (m, chunk) in symbols.chunks(params.coded_bits_per_symbol()).enumerate() {
        let spec = assemble_symbol(params, chunk, &gen_pilots(framing, m, params))?;
        samples.extend(modulate(params, &spec)?);
    }
    debug_assert_eq!(samples.len(), layout.total_len);
    Ok((TimeSignal::new(samples), layout))
}
