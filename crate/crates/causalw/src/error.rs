//! Crate-wide error type.

use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("duplicate subsystem label `{0}`")]
    DuplicateLabel(String),

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operator is not Hermitian (deviation {deviation:.3e} > tol {tol:.3e})")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("labels do not match: {0}")]
    LabelMismatch(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("rectangle lies outside the grid: {0}")]
    RectangleOutOfRange(String),

    #[error("caustic evolution time: |sin(Ω dt)| = {0:.3e} is singular")]
    CausticTime(f64),

    #[error("quadratic form is singular on the requested block (condition ~{condition:.3e})")]
    SingularForm { condition: f64 },

    #[error("bins overlap or are out of order: {0}")]
    OverlappingBins(String),

    #[error("invalid switch configuration: {0}")]
    InvalidConfig(String),

    #[error("config parse error: {0}")]
    ConfigParse(String),

    #[error("unknown config key `{0}`")]
    UnknownConfigKey(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
