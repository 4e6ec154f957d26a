use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid filter parameters: {0}")]
    InvalidParams(String),

    #[error("filter parameters differ: {left} vs {right}")]
    ParamsMismatch { left: String, right: String },

    #[error("bit index {index} out of range for m = {m}")]
    IndexOutOfRange { index: usize, m: usize },

    #[error("bad magic bytes in filter header")]
    BadMagic,

    #[error("unsupported filter format version {0}")]
    VersionUnsupported(u8),

    #[error("truncated filter payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },

    #[error("cannot clear {requested} bits, only {available} are set")]
    InsufficientSetBits { requested: usize, available: usize },

    #[error("retention undefined: s = {s} exceeds p1*m = {limit}")]
    RetentionDomain { s: f64, limit: f64 },

    #[error("false-positive set is empty")]
    EmptyFalsePositives,

    #[error("at least {needed} samples required, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("invalid configuration: {field}: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    #[error("trial {trial}: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("corpus parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("corpus has {available} cycles, {needed} required")]
    InsufficientCycles { needed: usize, available: usize },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field,
            reason: reason.into(),
        }
    }
}
