use std::path::PathBuf;

use thiserror::Error;
use voxanim_core::{BuildError, FormatError, IngestError, RenderError, SceneError};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_PARSE: i32 = 4;
pub const EXIT_VALIDATION: i32 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", .path.display())]
    Ingest { path: PathBuf, source: IngestError },
    #[error("{}: {source}", .path.display())]
    Format { path: PathBuf, source: FormatError },
    #[error("{}: {source}", .path.display())]
    Scene { path: PathBuf, source: SceneError },
    #[error(transparent)]
    Generate(IngestError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("built model failed validation: {0}")]
    InvalidModel(String),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error("csv line {line}: {reason}")]
    Csv { line: usize, reason: String },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io { .. } => EXIT_IO,
            CliError::Ingest { .. } | CliError::Format { .. } | CliError::Csv { .. } => EXIT_PARSE,
            CliError::Scene { source, .. } => match source {
                SceneError::ModelNotFound(_) | SceneError::ModelIo { .. } => EXIT_IO,
                SceneError::Json(_) | SceneError::ModelInvalid { .. } => EXIT_PARSE,
                _ => EXIT_VALIDATION,
            },
            CliError::Generate(e) => match e {
                IngestError::UnknownShape(_) | IngestError::UnknownColorMode(_) => EXIT_USAGE,
                _ => EXIT_VALIDATION,
            },
            CliError::Build(_) | CliError::InvalidModel(_) | CliError::Render(_) => EXIT_VALIDATION,
        }
    }
}
