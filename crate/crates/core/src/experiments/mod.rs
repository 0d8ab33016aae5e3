//! Monte Carlo harness: per-scheme trials, SNR sweeps, error-rate intervals
//! and per-direction throughput.

pub mod scheme;
pub mod selftest;
pub mod stats;
pub mod sweep;
pub mod throughput;
pub mod trial;

pub use scheme::SchemeId;
pub use selftest::{selftest, Check};
pub use stats::{ber_estimate, fer_estimate, wilson, RateEstimate};
pub use sweep::{snr_sweep, ImpulseConfig, NoiseKnowledge, ReceiverConfig, SweepConfig, SweepRow, SweepSummary};
pub use throughput::{throughput, ThroughputSet};
pub use trial::{xor_of_decodes, run_fpnc_trial, run_snc_trial, run_trial, run_ts_trial, Exchange, TrialContext, TrialRecord};
