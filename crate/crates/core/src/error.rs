use thiserror::Error;

#[derive(Debug, Error)]
pub enum QspError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("numerical degeneracy: {0}")]
    Degenerate(String),
    #[error("resonant coefficient matrix: {0}")]
    Resonant(String),
    #[error("accuracy target missed: {0}")]
    Accuracy(String),
    #[error("no solution: {0}")]
    NoSolution(String),
    #[error("solution space has dimension {dim}: {what}")]
    Ambiguous { dim: usize, what: String },
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

impl QspError {
    /// Process exit code used by the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            QspError::Input(_) => 2,
            QspError::Resource(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, QspError>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(QspError::Input(msg.into()))
}
