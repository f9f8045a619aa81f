use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A raw timestamp precedes the grid origin.
    #[error("timestamp {raw_epoch_s}s precedes grid origin {origin_epoch_s}s")]
    InvalidTimestamp {
        raw_epoch_s: i64,
        origin_epoch_s: i64,
    },

    /// An operation that requires at least one input point received none.
    #[error("empty input")]
    EmptyInput,

    /// No usable (present, numeric) samples were found.
    #[error("no usable samples")]
    NoData,

    /// A forecast needs history that the window does not contain.
    #[error("insufficient history: {0}")]
    InsufficientHistory(String),

    /// The forecast origin has no present, numeric value.
    #[error("no terminal value at forecast origin")]
    NoTerminalValue,

    /// Invalid configuration or parameters.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An evaluation produced no scorable prediction/target pairs.
    #[error("no evaluable points")]
    NoEvaluablePoints,

    /// A state snapshot could not be decoded.
    #[error("malformed snapshot: {0}")]
    Snapshot(String),

    /// An input file is not in the expected format.
    #[error("invalid input: {0}")]
    BadInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
