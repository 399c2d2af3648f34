use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite coordinate in {0}")]
    NonFinite(&'static str),

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("index method `{label}` is not strictly increasing at n = {n}")]
    NonMonotone { label: String, n: usize },

    #[error("horizon exceeded: needed {needed}, available {available}")]
    HorizonExceeded { needed: u64, available: u64 },

    #[error("deferred pair requires p(n) < q(n), violated at n = {0}")]
    DeferredOrder(usize),

    #[error("missing target row: strong means, densities and verdicts need d(x, A)")]
    MissingTarget,

    #[error("missing parameter `{0}`")]
    MissingParameter(&'static str),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("series metadata mismatch: {0}")]
    MetadataMismatch(String),

    #[error("bound alpha = {alpha} is below the observed deviation {observed} at probe {probe}")]
    BoundTooSmall { probe: usize, alpha: f64, observed: f64 },

    #[error("row {row} has support up to {support}, beyond series horizon {horizon}")]
    SupportOverflow { row: usize, support: usize, horizon: usize },

    #[error("horizon too small: {entries} entries, need at least {required}")]
    HorizonTooSmall { entries: usize, required: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("overflow evaluating `{expr}` at n = {n}")]
    Overflow { expr: String, n: u64 },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("invalid trace: {0}")]
    InvalidTrace(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
