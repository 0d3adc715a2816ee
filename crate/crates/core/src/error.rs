use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("index {index} out of range for length {len} (indices are 1-based)")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("symbol {symbol:?} is not in the alphabet")]
    UnknownSymbol { symbol: char },

    #[error("probability {value} at position {index} is outside [0, 1]")]
    InvalidProbability { index: usize, value: f64 },

    #[error("deletion probability must lie in [0, 1), got {0}")]
    InvalidDeletionProbability(f64),

    #[error("trace count must be at least 1")]
    NoTraces,

    #[error("trace of length {trace_len} is longer than the input length {n}")]
    TraceTooLong { trace_len: usize, n: usize },

    #[error("trace has zero probability under the given priors")]
    ZeroProbabilityTrace,

    #[error("no covering supersequence of length {n} exists for these traces")]
    UnreachableLength { n: usize },

    #[error("{what} exceeds its size guard ({size} > {limit})")]
    GuardExceeded {
        what: &'static str,
        size: u128,
        limit: u128,
    },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("edit error rate is undefined for an empty reference sequence")]
    EmptyReference,

    #[error("({from:?}) -> ({to:?}) is not an edge of the edit graph")]
    NotAnEdge { from: Vec<usize>, to: Vec<usize> },

    #[error("unknown algorithm id {0:?}")]
    UnknownAlgorithm(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn guard(what: &'static str, size: u128, limit: u128) -> Result<()> {
    if size > limit {
        Err(Error::GuardExceeded { what, size, limit })
    } else {
        Ok(())
    }
}
