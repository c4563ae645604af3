use std::path::PathBuf;

/// Errors of the IO and command layers.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error(transparent)]
    Core(#[from] qalloc_core::Error),
    #[error("parse error at data row {row}, column '{column}': cannot read '{value}' as a number")]
    Parse { row: usize, column: String, value: String },
    #[error("format error: {0}")]
    Format(String),
    #[error("missing artifact {path}: {hint}")]
    MissingArtifact { path: PathBuf, hint: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("config: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = AppError> = std::result::Result<T, E>;

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io { path: path.into(), source }
    }

    /// 1 data/config, 2 solver, 3 invariant violation.
    pub fn exit_code(&self) -> i32 {
        use qalloc_core::Error as E;
        match self {
            AppError::Core(E::Infeasible(_) | E::Solver(_)) => 2,
            AppError::Core(E::Invariant(_)) => 3,
            _ => 1,
        }
    }
}
