use dunkl_core::DunklError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Core(#[from] DunklError),
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// Core errors raised while building the group are config errors.
    pub fn config(e: DunklError) -> Self {
        CliError::Config(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                DunklError::InvalidParameter(_)
                | DunklError::NegativeMultiplicity { .. }
                | DunklError::MultiplicityNotOrbitConstant(_)
                | DunklError::DimensionMismatch { .. }
                | DunklError::ClosureOverflow { .. }
                | DunklError::Admissibility(_) => 2,
                DunklError::Regime(_) => 3,
                DunklError::ConditionFailed(_) => 4,
                _ => 5,
            },
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => 5,
        }
    }
}
