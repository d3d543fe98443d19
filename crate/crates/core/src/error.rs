use thiserror::Error;

/// Errors raised by the measurement library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("block size must be at least 1")]
    ZeroBlockSize,

    #[error("{auctions} auctions cannot be split evenly into {blocks} blocks")]
    Indivisible { auctions: usize, blocks: usize },

    #[error("bid {0} is not a level of the bid grid")]
    NotInGrid(f64),

    #[error("bid index {index} is out of range for a grid of {len} levels")]
    UnknownBid { index: usize, len: usize },

    #[error("invalid bid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate gap: a non-optimal arm has zero or negative gap ({0})")]
    DegenerateGap(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("schema mismatch in {path}: {detail}")]
    Schema { path: String, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("plot rendering failed: {0}")]
    Plot(String),
}

pub type Result<T> = std::result::Result<T, Error>;
