use thiserror::Error;

/// Errors raised by the solver toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// The document could not be parsed against the instance schema.
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },

    /// A weight specification used a family tag this build does not know.
    #[error("unknown weight family `{tag}` at `{path}`")]
    UnknownFamily { path: String, tag: String },

    /// A parsed or constructed value breaks a model invariant.
    #[error("invalid value at `{path}`: {reason}")]
    Invariant { path: String, reason: String },

    #[error("unsupported schema version {found} (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },

    /// Even the per-class minimum surrogate weight selection exceeds capacity.
    #[error("instance is irreparable: minimum surrogate total {min_total} exceeds capacity {capacity}")]
    Irreparable { min_total: f64, capacity: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invariant(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invariant { path: path.into(), reason: reason.into() }
    }
}
