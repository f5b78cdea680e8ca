use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("bound {requested} exceeds the supported maximum {max}")]
    Capacity { requested: u64, max: u64 },

    #[error("index {index} out of range (table holds {count} primes)")]
    Index { index: usize, count: usize },

    /// A query reaches past the sieved range. `max_usable` is the largest
    /// index (or value) that can be answered completely, when one exists.
    #[error("{what} exceeds table coverage (bound {bound}); largest usable: {max_usable:?}")]
    Coverage {
        what: String,
        bound: u64,
        max_usable: Option<u64>,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("cache file {path}: {reason}")]
    Cache { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
