use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid space: {0}")]
    InvalidSpace(String),
    #[error("cell index {index} out of range for a space of {len} cells")]
    CellOutOfRange { index: usize, len: usize },
    #[error("sets live in different grid spaces")]
    SpaceMismatch,
    #[error("empty set has no {0}")]
    EmptySet(&'static str),
    #[error("set is not connected ({0} components)")]
    NotConnected(usize),
    #[error("point ({0}, {1}) lies outside the domain")]
    PointOutsideDomain(f64, f64),
    #[error("{0}")]
    Precondition(String),
    #[error("plaque {plaque} fails the dendrite proxy: {reason}")]
    NotDendrite { plaque: usize, reason: String },
    #[error("{0}")]
    Format(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
