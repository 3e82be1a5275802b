use qka_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("config error: {0}")]
    Config(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl LabError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            LabError::Config(_) => 2,
            LabError::Internal(_) | LabError::Io(_) => 3,
        }
    }
}

impl From<CoreError> for LabError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Config(_)
            | CoreError::PositionMismatch(..)
            | CoreError::InvalidParams(_)
            | CoreError::Parse(_) => LabError::Config(e.to_string()),
            _ => LabError::Internal(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for LabError {
    fn from(e: serde_json::Error) -> Self {
        LabError::Internal(e.to_string())
    }
}

impl From<csv::Error> for LabError {
    fn from(e: csv::Error) -> Self {
        LabError::Internal(e.to_string())
    }
}
