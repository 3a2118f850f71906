use std::path::PathBuf;

use skorokhod_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: written for grid {found}, but the config builds grid {expected}")]
    ArtifactMismatch { path: PathBuf, expected: String, found: String },
    #[error("{path}: not found; run `skorokhod {producer}` first")]
    MissingArtifact { path: PathBuf, producer: &'static str },
    #[error("{path}: {message}")]
    Artifact { path: PathBuf, message: String },
    #[error("marginals are not in subharmonic order (separation {gap:.3e}); witness written to {witness}")]
    Infeasible { gap: f64, witness: PathBuf },
    #[error("solver budget exhausted: {0}")]
    Budget(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    /// Process exit code: 2 config, 3 infeasible, 4 budget, 5 verification, 1 other.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::ArtifactMismatch { .. } | CliError::MissingArtifact { .. } => 2,
            CliError::Artifact { .. } => 2,
            CliError::Infeasible { .. } => 3,
            CliError::Budget(_) => 4,
            CliError::Verification(_) => 5,
            CliError::Core(e) => match e {
                CoreError::Config { .. }
                | CoreError::InvalidDomain(_)
                | CoreError::EmptyGrid
                | CoreError::GridTooLarge { .. }
                | CoreError::Serde(_)
                | CoreError::InstanceTooLarge { .. }
                | CoreError::SubharmonicityRequired { .. } => 2,
                CoreError::Infeasible { .. } | CoreError::NotInSubharmonicOrder { .. } => 3,
                CoreError::BudgetExhausted(_) | CoreError::MaxIterations { .. } => 4,
                _ => 1,
            },
        }
    }
}

pub(crate) fn io_err(path: &std::path::Path, e: impl std::fmt::Display) -> CliError {
    CliError::Artifact { path: path.to_path_buf(), message: e.to_string() }
}
