use crate::model::ModelError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("only {found} essential degrees exist but r = {r} were requested")]
    TooFewEssential { found: usize, r: usize },
    #[error("exact analysis needs rational parameters whose probabilities sum to exactly 1")]
    Inexact,
    /// Two routes to the same quantity disagree, or a structural identity
    /// that holds by construction failed.
    #[error("internal consistency: {0}")]
    Consistency(String),
    #[error("numerical: {0}")]
    Numerical(String),
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Consistency(_) | Error::Numerical(_) => 3,
            _ => 1,
        }
    }
}
