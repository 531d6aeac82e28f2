use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Domain(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("series not invertible: {0}")]
    NotInvertible(String),
    #[error("regularized sum diverges")]
    Divergent,
    #[error("out-of-order residue: {0}")]
    ResidueOrder(String),
    #[error("internal consistency failure: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
