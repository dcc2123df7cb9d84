//! Runner-level errors, wrapping pipeline failures with file context.

use std::path::PathBuf;

use thiserror::Error;

use edgeplace::PipelineError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error("manifest {path}: {reason}")]
    Manifest { path: PathBuf, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
