use std::path::PathBuf;

use density_gauge_core::{DensityError, GeometryError, QuadtreeError};

/// Every failure the command line can report, with its exit code.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{0}")]
    Usage(String),
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("cannot read {}: {source}", path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write output: {0}")]
    Write(#[from] std::io::Error),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Quadtree(#[from] QuadtreeError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl AppError {
    pub fn parse(path: impl Into<PathBuf>, line: u64, message: impl Into<String>) -> Self {
        AppError::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// 2 usage, 3 unreadable or malformed input, 4 refusal (oracle cap,
    /// domain), 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Usage(_) => 2,
            AppError::Parse { .. } | AppError::Read { .. } | AppError::Geometry(_) => 3,
            AppError::Density(DensityError::UnsupportedFactor(_)) => 2,
            AppError::Density(_) | AppError::Quadtree(_) => 4,
            AppError::Write(_) => 1,
        }
    }
}
