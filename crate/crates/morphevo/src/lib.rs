//! File formats, run archives, parallel evaluation and the `morphevo`
//! command line on top of `morphevo-core`.

use std::io;
use std::path::Path;

use morphevo_core::analysis::AnalysisError;
use morphevo_core::evolution::EvolutionError;
use morphevo_core::terrain::TerrainError;

pub mod archive;
pub mod cli;
pub mod documents;
pub mod experiment;
pub mod heightmap_io;
pub mod parallel;
pub mod trajectory_io;

pub use morphevo_core as core;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid document: {0}")]
    Invalid(String),
    #[error("invalid configuration field `{0}`")]
    Config(String),
    #[error("generation {generation}: {source}")]
    Checkpoint { generation: usize, source: Box<Error> },
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error(transparent)]
    Terrain(#[from] TerrainError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("{0}")]
    Usage(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn io(path: &Path, source: io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// Prefixes parse errors with the file they came from.
    pub fn in_file(self, path: &Path) -> Self {
        match self {
            Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
            other => other,
        }
    }

    /// Process exit status: 1 for user errors, 2 for internal ones.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Internal(_) => 2,
            Error::Checkpoint { source, .. } => source.exit_code(),
            _ => 1,
        }
    }
}
