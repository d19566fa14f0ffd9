use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error("bad config: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] orbitweave::Error),

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },

    #[error("final distance {distance} exceeds the bound {bound}")]
    TargetMissed { distance: f64, bound: f64 },

    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    /// 1 target missed, 2 config or precondition, 3 schedule truncation,
    /// 4 resource cap, 5 internal invariant.
    pub fn exit_code(&self) -> u8 {
        use orbitweave::Error as E;
        match self {
            CliError::TargetMissed { .. } => 1,
            CliError::Read { .. } | CliError::Config(_) | CliError::Write { .. } => 2,
            CliError::Internal(_) => 5,
            CliError::Core(e) => match e {
                E::ScheduleOverflow { .. } => 3,
                E::ResourceCap { .. } => 4,
                E::Invariant(_) => 5,
                _ => 2,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}
