use thiserror::Error;

/// Errors raised by the numerical routines and the command-line front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("grid of size {grid_size} aliases frequencies up to {max_freq}; need grid_size > {}", 2 * max_freq)]
    Aliasing { max_freq: u64, grid_size: usize },

    #[error("flatness undefined: {0}")]
    UndefinedFlatness(String),

    #[error("resource budget exceeded: {0}")]
    ResourceBudget(String),

    #[error("grid quadrature did not converge: relative change {relative_change:e} between M={grid_size} and 2M")]
    NotConverged {
        grid_size: usize,
        relative_change: f64,
    },

    #[error("truncation inadequate: {0}")]
    TruncationInadequate(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
