use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// Output could not be written or another runtime failure outside the physics.
    pub const IO: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const NUMERICAL: i32 = 3;
    pub const ORACLE_CHECK: i32 = 4;
}

#[derive(Debug, Error)]
pub enum AppError {
    /// The configuration text could not be parsed; the message carries line and column.
    #[error("parse error in {source_name}: {message}")]
    Parse { source_name: String, message: String },
    /// A parsed value violates the schema or a physical constraint.
    #[error("invalid configuration: {path}: {message}")]
    Validation { path: String, message: String },
    #[error("unknown figure `{0}`; known figures: fig3, fig4, fig5, fig6, fig8, fig9, fig10, fig11, fig12 (fig7 is a schematic)")]
    UnknownFigure(String),
    /// One or more sweep points failed numerically (the table is still written).
    #[error("numerical failure at {failed} of {total} points (first: {first})")]
    Numerical { failed: usize, total: usize, first: String },
    #[error("numerical failure: {0}")]
    Core(#[from] lambdacool_core::Error),
    #[error("oracle check failed at {failed} of {total} points")]
    OracleCheck { failed: usize, total: usize },
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl AppError {
    pub fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        AppError::Validation { path: path.into(), message: message.into() }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        AppError::Io { context: context.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Parse { .. } | AppError::Validation { .. } | AppError::UnknownFigure(_) => exit::CONFIG,
            AppError::Numerical { .. } | AppError::Core(_) => exit::NUMERICAL,
            AppError::OracleCheck { .. } => exit::ORACLE_CHECK,
            AppError::Io { .. } => exit::IO,
        }
    }
}

pub type AppResult<T> = Result<T, AppError>;
