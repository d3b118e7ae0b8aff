use std::io;

use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("under-truncated ladder: tail mass {tail_mass:.3e} at n_max = {n_max} exceeds {tolerance:.1e}")]
    UnderTruncation {
        n_max: usize,
        tail_mass: f64,
        tolerance: f64,
    },

    #[error("integration unstable at step {step}: P_{level} = {value:.3e}")]
    Instability { step: usize, level: usize, value: f64 },

    #[error("probability drift {drift:.3e} at step {step} exceeds the conservation bound")]
    NormalizationDrift { step: usize, drift: f64 },

    #[error("ladder with n_max = {n_max} is too large for dense exponentiation (limit {limit})")]
    TooLargeForDense { n_max: usize, limit: usize },

    #[error("invalid stroke schedule: {0}")]
    Schedule(String),

    #[error("config line {line}: `{key}`: {message}")]
    Config { line: usize, key: String, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be finite and > 0, got {value}"),
        })
    }
}
