use thiserror::Error;

/// Errors raised by the laboratory routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("invalid exponent p = {0}; expected p >= 1")]
    InvalidExponent(f64),

    #[error("curve outside the non-flat class: {0}")]
    NotNonFlat(String),

    #[error("cannot parse curve descriptor {input:?}: {reason}")]
    CurveSyntax { input: String, reason: String },

    #[error("corrupt curve: {0}")]
    CorruptCurve(String),

    #[error("argument {value} outside the domain of {what}")]
    Domain { what: &'static str, value: f64 },

    #[error("no critical point: ratio {ratio} outside the range of the derivative on the window")]
    NoCriticalPoint { ratio: f64 },

    #[error("Hölder identity violated: 1/p + 1/q + 1/r' = {0}")]
    HolderViolated(f64),

    #[error("fit refused: {0}")]
    FitRefused(String),

    #[error("level {lambda} is not above the grid average {average}; CZ intervals would leave the grid")]
    LevelTooLow { lambda: f64, average: f64 },

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
