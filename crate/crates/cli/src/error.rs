use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("scenario file not found: {0}")]
    FileNotFound(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("schema violation at key '{key}': {reason}")]
    Schema { key: String, reason: String },
    #[error(transparent)]
    Core(#[from] qkd_audit_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_cap() => 3,
            CliError::Io(_) => 1,
            _ => 2,
        }
    }
}
