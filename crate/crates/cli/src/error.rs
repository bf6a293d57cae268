use thiserror::Error;

/// Failures that map to a dedicated process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("post-selection has vanishing probability ({0:.3e})")]
    ZeroPostselection(f64),

    #[error("oracle mismatch: max residual {residual:.3e} exceeds {tolerance:.1e}")]
    OracleMismatch { residual: f64, tolerance: f64 },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::ZeroPostselection(_) => 3,
            CliError::OracleMismatch { .. } => 4,
        }
    }
}
