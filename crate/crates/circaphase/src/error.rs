use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by the IO layer and the command-line front end.
#[derive(Debug, Error)]
pub enum AppError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("data error: {0}")]
    Data(String),
    #[error(transparent)]
    Core(#[from] circaphase_core::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 1 usage, 2 data, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        use circaphase_core::Error as E;
        match self {
            AppError::Usage(_) => 1,
            AppError::Core(
                E::NonFiniteSample { .. }
                | E::StepTooLarge { .. }
                | E::NonAdvancingArgument { .. },
            ) => 3,
            _ => 2,
        }
    }
}

pub type AppResult<T> = Result<T, AppError>;
