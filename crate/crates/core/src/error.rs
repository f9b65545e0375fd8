use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("bad design parameters ({q},{k},{lambda}): {reason}")]
    BadParams {
        q: usize,
        k: usize,
        lambda: usize,
        reason: &'static str,
    },
    #[error("base set is not a cyclic difference set: rows {row_a} and {row_b} correlate to {got}, expected {expected}")]
    NotADifferenceSet {
        row_a: usize,
        row_b: usize,
        got: usize,
        expected: usize,
    },
    #[error("no cyclic difference set found for ({q},{k},{lambda})")]
    NoDesignFound { q: usize, k: usize, lambda: usize },
    #[error("expected {expected} bits, got {got}")]
    BitWidthMismatch { expected: usize, got: usize },
    #[error("level count must be at least 1")]
    BadLevelCount,
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid permutation: {0}")]
    BadPermutation(String),
    #[error("bad channel geometry: {0}")]
    BadGeometry(String),
    #[error("cyclic propagation needs frame length {expected}, got {got}")]
    ModeMismatch { expected: usize, got: usize },
    #[error("scheme {0} is not supported by this operation")]
    WrongScheme(&'static str),
    #[error("unknown figure `{0}`")]
    UnknownFigure(String),
    #[error("invalid configuration: {field}: {message}")]
    ConfigInvalid { field: String, message: String },
    #[error("catalog line {line}: {message}")]
    Catalog { line: usize, message: String },
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::ConfigInvalid {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
