use std::fmt;

use thiserror::Error;

/// Pipeline stage an error originated in; decides the exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Ingest,
    Detect,
    Features,
    Stream,
    Compare,
    Output,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Config => "config",
            Stage::Ingest => "ingest",
            Stage::Detect => "detect",
            Stage::Features => "features",
            Stage::Stream => "stream",
            Stage::Compare => "compare",
            Stage::Output => "output",
        }
    }

    /// 1 for invalid configuration, 2 for data problems, 3 for failures
    /// while running or writing.
    pub fn exit_code(self) -> u8 {
        match self {
            Stage::Config => 1,
            Stage::Ingest | Stage::Detect | Stage::Features | Stage::Compare => 2,
            Stage::Stream | Stage::Output => 3,
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error)]
#[error("[{stage}] {message}")]
pub struct CliError {
    pub stage: Stage,
    pub message: String,
}

impl CliError {
    pub fn new(stage: Stage, message: impl Into<String>) -> Self {
        Self {
            stage,
            message: message.into(),
        }
    }
}

/// Attach a stage to any displayable error.
pub trait StageExt<T> {
    fn stage(self, stage: Stage) -> Result<T, CliError>;
}

impl<T, E: fmt::Display> StageExt<T> for Result<T, E> {
    fn stage(self, stage: Stage) -> Result<T, CliError> {
        self.map_err(|e| CliError::new(stage, e.to_string()))
    }
}
