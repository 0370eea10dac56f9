use std::path::{Path, PathBuf};

use sweepkit_core::SweepError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error("{}: {source}", path.display())]
    InFile { path: PathBuf, source: Box<CliError> },
}

impl CliError {
    pub fn in_file(self, path: &Path) -> Self {
        CliError::InFile {
            path: path.to_path_buf(),
            source: Box::new(self),
        }
    }

    /// Every failure maps to exit code 2; 0 and 1 are reserved for verdicts.
    pub fn exit_code(&self) -> u8 {
        2
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
