use thiserror::Error;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid Bernoulli map parameters: {0}")]
    InvalidMap(String),

    #[error("degenerate chaotic sequence (sample variance {variance:e}); choose another initial condition")]
    DegenerateSequence { variance: f64 },

    #[error("spreading sequence too short: need {needed} chips, have {available}")]
    SequenceTooShort { needed: usize, available: usize },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("spreading factor must be at least 1")]
    InvalidSpreadingFactor,

    #[error("symbol {0} is not antipodal (must be -1 or +1)")]
    InvalidSymbol(i8),

    #[error("user count L must be even and at least 2, got {0}")]
    InvalidUserCount(usize),

    #[error("bit energy must be positive, got {0}")]
    NonPositiveEnergy(f64),

    #[error("noise spectral density must be positive, got {0}")]
    NonPositiveNoise(f64),

    #[error("invalid network configuration: {0}")]
    InvalidNetwork(String),

    #[error("invalid sweep configuration: {0}")]
    InvalidSweep(String),
}

pub type Result<T> = std::result::Result<T, Error>;
