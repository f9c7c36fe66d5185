use thiserror::Error;

/// Errors raised by the library. The CLI maps these onto exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid field parameters: {0}")]
    InvalidField(String),

    #[error("elements belong to different fields")]
    FieldMismatch,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("point {0} does not lie on the grid")]
    OffGrid(String),

    #[error("expected a {expected}-domain function, found {found}")]
    DomainMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("window term {index}: {reason}")]
    WindowTerm { index: usize, reason: String },

    #[error("lattice incompatible with grid: {0}")]
    Lattice(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
