use serde_json::json;
use thiserror::Error;

/// Failure of a run, grouped by exit status.
#[derive(Debug, Error)]
pub enum RunError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Validation(_) => 2,
            RunError::Numerical(_) => 3,
            RunError::Io(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Validation(_) => "validation",
            RunError::Numerical(_) => "numerical",
            RunError::Io(_) => "io",
        }
    }

    /// The machine-readable form written to stderr.
    pub fn to_json(&self) -> String {
        json!({ "error": { "kind": self.kind(), "message": self.to_string(), "exit_code": self.exit_code() } })
            .to_string()
    }
}

impl From<hartree_core::Error> for RunError {
    fn from(e: hartree_core::Error) -> Self {
        use hartree_core::Error as E;
        match e {
            E::BlowUp { .. } | E::Numerical(_) => RunError::Numerical(e.to_string()),
            E::Io(_) => RunError::Io(e.to_string()),
            _ => RunError::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e.to_string())
    }
}

pub type RunResult<T> = Result<T, RunError>;
