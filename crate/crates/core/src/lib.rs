//! Baseband link-level simulator of frequency-domain physical-layer network
//! coding (FPNC) over OFDM in the two-way relay channel.
//!
//! Two end nodes transmit simultaneously to a relay; the relay maps each
//! subcarrier of the superimposed signal to the XOR of the two BPSK symbols,
//! channel-decodes the XOR codeword and broadcasts it back.

pub mod channel;
pub mod config;
pub mod endnode;
pub mod error;
pub mod experiments;
pub mod fixtures;
pub mod par;
pub mod phy;
pub mod relay;
pub mod rng;
pub mod signal;

pub use error::{Error, Result};
