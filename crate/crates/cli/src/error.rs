use std::path::{Path, PathBuf};

use annealc::analysis::AnalysisError;
use annealc::chimera::ChimeraError;
use annealc::frontends::FrontendError;
use annealc::pbf::PbfError;
use annealc::qubo_ising::ModelError;
use annealc::reduce::ReduceError;
use annealc::solvers::SolverError;
use thiserror::Error;

/// Everything a command can fail with. The variant fixes the exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Contract(String),
    #[error("{0}")]
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Parse(_) => 2,
            CliError::Contract(_) => 3,
            CliError::Solver(_) => 4,
        }
    }

    /// Prefixes the message with the file it concerns.
    pub fn in_file(self, path: &Path) -> Self {
        let at = |m: String| format!("{}: {m}", path.display());
        match self {
            CliError::Parse(m) => CliError::Parse(at(m)),
            CliError::Contract(m) => CliError::Contract(at(m)),
            other => other,
        }
    }
}

impl From<PbfError> for CliError {
    fn from(e: PbfError) -> Self {
        match e {
            PbfError::Parse { .. } => CliError::Parse(e.to_string()),
            _ => CliError::Contract(e.to_string()),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Parse { .. } => CliError::Parse(e.to_string()),
            _ => CliError::Contract(e.to_string()),
        }
    }
}

impl From<FrontendError> for CliError {
    fn from(e: FrontendError) -> Self {
        match e {
            FrontendError::Parse { .. } => CliError::Parse(e.to_string()),
            _ => CliError::Contract(e.to_string()),
        }
    }
}

impl From<ReduceError> for CliError {
    fn from(e: ReduceError) -> Self {
        match e {
            ReduceError::Sidecar { .. } | ReduceError::Pbf(PbfError::Parse { .. }) => CliError::Parse(e.to_string()),
            _ => CliError::Contract(e.to_string()),
        }
    }
}

impl From<ChimeraError> for CliError {
    fn from(e: ChimeraError) -> Self {
        match e {
            ChimeraError::Parse { .. } => CliError::Parse(e.to_string()),
            // the heuristic gave up: a solver-side failure, not bad input
            ChimeraError::EmbeddingNotFound(_) => CliError::Solver(e.to_string()),
            _ => CliError::Contract(e.to_string()),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Model(m) => m.into(),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Solver(s) => s.into(),
            AnalysisError::Model(m) => m.into(),
            AnalysisError::Invalid(_) => CliError::Contract(e.to_string()),
            AnalysisError::NoSuccess => CliError::Solver(e.to_string()),
        }
    }
}
