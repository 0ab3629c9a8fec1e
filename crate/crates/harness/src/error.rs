use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    /// Bad input, configuration or file contents.
    #[error("validation error: {0}")]
    Validation(String),
    #[error("training did not converge: {0}")]
    NonConvergence(String),
    #[error(transparent)]
    Core(#[from] nonmodular::Error),
    #[error("I/O error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.as_ref().display().to_string(), source }
    }

    /// Process exit code: 2 for validation problems, 3 for non-convergence,
    /// 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        use nonmodular::Error as E;
        match self {
            HarnessError::Validation(_) | HarnessError::Json(_) => 2,
            HarnessError::NonConvergence(_) => 3,
            HarnessError::Core(e) => match e {
                E::Lp { .. } => 1,
                _ => 2,
            },
            HarnessError::Io { .. } | HarnessError::Csv(_) => 1,
        }
    }
}

pub type HResult<T> = Result<T, HarnessError>;
