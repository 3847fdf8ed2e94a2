use std::path::PathBuf;

use thiserror::Error;

use crate::bundle::BundleError;

/// Failure while reading an input file.
#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: u64, message: String },
    #[error("line {line}: unknown label {label:?}")]
    UnknownLabel { line: u64, label: String },
    #[error("line {line}: {source}")]
    Invalid {
        line: u64,
        #[source]
        source: cogdist_core::Error,
    },
    #[error("cannot infer the format of {0}; pass --format")]
    UnknownFormat(PathBuf),
}

/// Anything a subcommand can fail with. [`CliError::exit_code`] separates
/// usage problems from pipeline failures.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error(transparent)]
    Pipeline(#[from] cogdist_core::Error),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Load(LoadError::Io { source, .. }) if source.kind() == std::io::ErrorKind::NotFound => 2,
            CliError::Load(LoadError::UnknownFormat(_)) => 2,
            CliError::Bundle(BundleError::Io { source, .. }) if source.kind() == std::io::ErrorKind::NotFound => 2,
            _ => 1,
        }
    }
}
