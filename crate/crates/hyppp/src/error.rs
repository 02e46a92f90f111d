use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An index fell outside the valid 1-based range of a container.
    #[error("index out of range: {0}")]
    Index(String),

    /// Dimensions of the supplied containers do not fit together.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A signancy set was empty or referenced a factor outside 1..=M.
    #[error("invalid signancy set: {0}")]
    InvalidSignancy(String),

    /// A rank L was requested that the ground space cannot support.
    #[error("rank error: {0}")]
    Rank(String),

    /// A plain argument error (counts, ranges, malformed flags).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Conditioning on a prefix whose density is numerically zero.
    #[error("conditioning error: {0}")]
    Conditioning(String),

    /// A factorial-moment sequence that cannot come from a {0..L} count.
    #[error("inconsistent moments: {0}")]
    InconsistentMoments(String),

    /// An eigenvalue escaped the closed unit interval beyond tolerance.
    #[error("spectrum error: {0}")]
    Spectrum(String),

    /// Exhaustive enumeration was requested on an instance over the size guard.
    #[error("instance too large: {0}")]
    TooLarge(String),

    /// A container would have stored a NaN or infinite value.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
