use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("degenerate state: {0}")]
    Degenerate(String),
    #[error("empty subspace: {0}")]
    EmptySubspace(String),
    #[error("unknown region `{0}`")]
    UnknownRegion(String),
    #[error("dof index {0} out of range")]
    DofOutOfRange(usize),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("singular point: {0}")]
    Singular(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
}

impl Error {
    /// Numeric failures map to a different CLI exit code than validation errors.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Numeric(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
