use std::process::ExitCode;

use tailsitter::aero::AeroError;
use tailsitter::dataset::DatasetError;
use tailsitter::mission::MissionError;
use tailsitter::mlp::MlpError;
use tailsitter::train::TrainError;
use thiserror::Error;

/// Failure classes, each with its own exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("file error: {0}")]
    Io(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Numerical(_) => 4,
        })
    }

    pub fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }
}

impl From<AeroError> for CliError {
    fn from(e: AeroError) -> Self {
        match e {
            AeroError::InvalidParams(_) => CliError::Config(e.to_string()),
            AeroError::NonFiniteAngle(_) => CliError::Numerical(e.to_string()),
            AeroError::InvalidTable(_) | AeroError::Csv { .. } | AeroError::Io(_) => {
                CliError::Io(e.to_string())
            }
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Csv { .. } | DatasetError::Io(_) => CliError::Io(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<MlpError> for CliError {
    fn from(e: MlpError) -> Self {
        match e {
            MlpError::InvalidTopology(_) => CliError::Config(e.to_string()),
            MlpError::NonFinite(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Io(e.to_string()),
        }
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::Diverged(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<MissionError> for CliError {
    fn from(e: MissionError) -> Self {
        match e {
            MissionError::Diverged { .. } => CliError::Numerical(e.to_string()),
            MissionError::Io(_) => CliError::Io(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}
