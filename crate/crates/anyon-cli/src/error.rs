use anyon::acsim::AcError;
use anyon::circuit::CircuitError;
use anyon::model::ModelError;
use anyon::spectra::SpectraError;
use anyon::topology::TopologyError;
use std::io;
use std::path::PathBuf;
use thiserror::Error;

/// Failure of a command, sorted by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration or arguments (exit 2).
    #[error("{0}")]
    Validation(String),
    /// A computation could not produce a trustworthy answer (exit 3).
    #[error("{0}")]
    Numerical(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<SpectraError> for CliError {
    fn from(e: SpectraError) -> Self {
        match e {
            SpectraError::Model(e) => e.into(),
            SpectraError::InvalidGrid(_) => CliError::Validation(e.to_string()),
            SpectraError::ConvergenceFailure
            | SpectraError::NotNormalized(_)
            | SpectraError::NoDoublonBand(_)
            | SpectraError::NoMinimum(..) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<TopologyError> for CliError {
    fn from(e: TopologyError) -> Self {
        match e {
            TopologyError::Model(e) => e.into(),
            TopologyError::Spectra(e) => e.into(),
            TopologyError::DivisionByZero | TopologyError::OddSize(_) => CliError::Validation(e.to_string()),
            TopologyError::AmbiguousParity(_) | TopologyError::GapClosed(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<CircuitError> for CliError {
    fn from(e: CircuitError) -> Self {
        match e {
            CircuitError::Model(e) => e.into(),
            CircuitError::Spectra(e) => e.into(),
            CircuitError::SingularSynthesis(_) => CliError::Numerical(e.to_string()),
            CircuitError::UnsupportedSign(_) | CircuitError::InvalidConfig { .. } | CircuitError::Parse { .. } => {
                CliError::Validation(e.to_string())
            }
        }
    }
}

impl From<AcError> for CliError {
    fn from(e: AcError) -> Self {
        match e {
            AcError::Circuit(e) => e.into(),
            AcError::Model(e) => e.into(),
            AcError::SingularMatrix { .. } => CliError::Numerical(e.to_string()),
            AcError::ZeroFrequency(_) | AcError::ModeMismatch(_) | AcError::InvalidNode(_) | AcError::InvalidGrid(_) => {
                CliError::Validation(e.to_string())
            }
        }
    }
}
