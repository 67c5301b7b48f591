use thiserror::Error;

/// Errors reported by the core library.
#[derive(Debug, Error)]
pub enum Error {
    /// A physical grid is too coarse to represent a spectral state without aliasing.
    #[error("grid of {grid} points cannot resolve cutoff {cutoff} (need at least {min} points)")]
    GridTooCoarse {
        grid: usize,
        cutoff: usize,
        min: usize,
    },

    /// A value that must be a probability lies outside [0, 1].
    #[error("probability {value} outside [0, 1]")]
    InvalidProbability { value: f64 },

    /// An exponent lies outside its admissible range.
    #[error("exponent {name} = {value} outside {range}")]
    InvalidExponent {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    /// A configuration violates an invariant.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
