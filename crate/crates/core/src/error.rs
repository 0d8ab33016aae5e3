use thiserror::Error;

/// Errors raised by the simulator library.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or input shape is inconsistent with the configured numerology.
    #[error("configuration error: {0}")]
    Config(String),

    /// Two inputs that must agree in length do not.
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    /// A probability-like input fell outside `[0, 1]`.
    #[error("value {value} for {what} is outside [0, 1]")]
    OutOfUnitRange { what: &'static str, value: f64 },

    /// The scenario violates the delay-spread-within-CP requirement.
    #[error("delay spread {delay_spread} exceeds cyclic prefix length {cp_len}")]
    CpViolation { delay_spread: usize, cp_len: usize },

    #[error("scenario file: {0}")]
    Scenario(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
