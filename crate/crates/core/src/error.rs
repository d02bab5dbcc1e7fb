use thiserror::Error;

/// Errors raised by the numerical routines and the experiment engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate channel: all singular values are zero")]
    DegenerateChannel,

    #[error("requested {streams} streams but the channel has rank {rank}")]
    RankDeficient { streams: usize, rank: usize },

    #[error("degenerate combiner: noise covariance is not positive definite")]
    DegenerateCombiner,

    #[error("bit resolution {0} is below 1 bit")]
    BitsOutOfDomain(f64),

    #[error("distortion parameter {value} lies outside [{lower}, {upper}]")]
    DeltaOutOfRange { value: f64, lower: f64, upper: f64 },

    #[error("invalid bit range [{min}, {max}]")]
    InvalidBitRange { min: u32, max: u32 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error(
        "brute-force search needs {combos} combinations, limit is {limit}; reduce the RF chain count or the bit range"
    )]
    TooManyCombinations { combos: u128, limit: u128 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no schemes enabled")]
    NoSchemes,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
