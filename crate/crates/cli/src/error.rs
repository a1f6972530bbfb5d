use hinf_energy::Error as CoreError;
use thiserror::Error;

/// Failure of a command, carrying the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed input file, grid or argument value.
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Core(#[from] CoreError),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn parse(msg: impl Into<String>) -> Self {
        CliError::Parse(msg.into())
    }

    /// 2 bad input, 3 Riccati failure, 4 singular k-way system, 5 budget, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Io(_) => 1,
            CliError::Core(e) => match e {
                CoreError::NoStabilizingSolution(_)
                | CoreError::IndefiniteSolution { .. }
                | CoreError::InaccurateSolution { .. } => 3,
                CoreError::NearSingular { .. } | CoreError::ImaginaryResidue { .. } => 4,
                CoreError::BudgetExceeded { .. } => 5,
                CoreError::DimensionMismatch(_) | CoreError::InvalidArgument(_) => 2,
                _ => 1,
            },
        }
    }
}
