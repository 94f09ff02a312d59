use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("row {row} is not a probability vector (sum {sum}, min entry {min})")]
    NonStochasticRow { row: usize, sum: f64, min: f64 },
    #[error("row {row} has {found} entries, expected {expected}")]
    RaggedRows {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("lambda {0} outside [0, 1]")]
    LambdaOutOfRange(f64),
    #[error("{what} = {value} is out of range")]
    OutOfRange { what: &'static str, value: f64 },
    #[error("unknown state {0}")]
    UnknownState(String),
    #[error("duplicate state label {0}")]
    DuplicateState(String),
    #[error("enumeration needs {needed} entries, cap is {cap}")]
    EnumerationCapExceeded { needed: u128, cap: u128 },
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("LP solver failed: {0}")]
    SolverFailure(String),
    #[error("family is symmetrizable (min F = {min_f:e}); radius undefined")]
    Symmetrizable { min_f: f64 },
    #[error("no positivity guarantee: {0}")]
    NoGuarantee(String),
    #[error("no convergence after {iterations} iterations (gap {gap:e})")]
    NoConvergence { iterations: usize, gap: f64 },
    #[error("invalid code: {0}")]
    InvalidCode(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("channel {index}: {source}")]
    InChannel { index: usize, source: Box<Error> },
}

impl Error {
    /// Stable snake-case identifier, used as the machine-readable error code.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonStochasticRow { .. } => "non_stochastic_row",
            Error::RaggedRows { .. } => "ragged_rows",
            Error::Empty(_) => "empty",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::LambdaOutOfRange(_) => "lambda_out_of_range",
            Error::OutOfRange { .. } => "out_of_range",
            Error::UnknownState(_) => "unknown_state",
            Error::DuplicateState(_) => "duplicate_state",
            Error::EnumerationCapExceeded { .. } => "enumeration_cap_exceeded",
            Error::LengthMismatch(_) => "length_mismatch",
            Error::SolverFailure(_) => "solver_failure",
            Error::Symmetrizable { .. } => "symmetrizable",
            Error::NoGuarantee(_) => "no_guarantee",
            Error::NoConvergence { .. } => "no_convergence",
            Error::InvalidCode(_) => "invalid_code",
            Error::Invalid(_) => "invalid",
            Error::Json(_) => "malformed_json",
            Error::InChannel { source, .. } => source.kind(),
        }
    }

    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
