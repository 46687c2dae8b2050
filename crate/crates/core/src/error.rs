use thiserror::Error;

/// Errors raised by the estimation and testing routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of a mathematical function.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid taper spec: {0}")]
    TaperSpec(String),

    #[error("invalid model: {0}")]
    Model(String),

    #[error("invalid grid: {0}")]
    Grid(String),

    /// The series cannot support the requested computation.
    #[error("invalid series: {0}")]
    Series(String),

    #[error("invalid table: {0}")]
    Table(String),

    #[error("monte carlo study aborted: {0}")]
    Study(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
