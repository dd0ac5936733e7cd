use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("valuation of zero undefined")]
    ZeroValuation,
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("matrix is singular: not in GL_d")]
    Singular,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },
    #[error("{what} out of range: {detail}")]
    OutOfRange { what: &'static str, detail: String },
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("weights sum to {sum}, expected 1")]
    WeightSum { sum: String },
    #[error("budget exceeded: {detail}")]
    Budget { detail: String },
    #[error("flag level {level}: {message}")]
    FlagLevel { level: usize, message: String },
    #[error("place mismatch: {0} vs {1}")]
    PlaceMismatch(String, String),
}

impl Error {
    pub(crate) fn dims(expected: impl ToString, found: impl ToString) -> Self {
        Error::DimensionMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by an enumeration or size budget rather than bad input.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::Budget { .. })
    }
}
