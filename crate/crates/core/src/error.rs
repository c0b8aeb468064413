use thiserror::Error;

/// Errors raised by the ALCC library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty transform")]
    EmptyTransform,

    #[error("empty system")]
    EmptySystem,

    #[error("singular system")]
    SingularSystem,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("data out of range: |{value}| exceeds r = {bound}")]
    DataOutOfRange { value: f64, bound: f64 },

    #[error("insufficient workers: need {needed}, got {got}")]
    InsufficientWorkers { needed: usize, got: usize },

    #[error("duplicate worker index {0}")]
    DuplicateWorker(usize),

    #[error("index {index} outside 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("unbounded leakage: noise standard deviation is zero")]
    UnboundedLeakage,

    #[error("noise mixing matrix is singular for colluding set {0:?}")]
    SingularCollusion(Vec<usize>),

    #[error("{0} colluding subsets exceed the exhaustive search limit; use sampled search")]
    SearchSpaceTooLarge(u128),

    #[error("truncation level too small for bound: theta = {theta} <= {threshold}")]
    TruncationTooSmall { theta: f64, threshold: f64 },

    #[error("truncation weight w = {0} is not positive")]
    NonPositiveWeight(f64),

    #[error("field too small: p = {p} cannot hold {needed} distinct evaluation points")]
    FieldTooSmall { p: u64, needed: usize },

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("coefficient {0} has no exact field representation")]
    NonIntegerCoefficient(f64),

    #[error("expansion needs more than {0} monomials")]
    ExpansionTooLarge(usize),

    #[error("invalid configuration `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

impl Error {
    /// The configuration key at fault, for errors caused by bad input
    /// parameters rather than by the computation.
    pub fn config_key(&self) -> Option<&str> {
        match self {
            Error::Config { key, .. } => Some(key),
            Error::InvalidParameter { name, .. } => Some(name),
            Error::NotPrime(_) | Error::FieldTooSmall { .. } => Some("p"),
            _ => None,
        }
    }
}
