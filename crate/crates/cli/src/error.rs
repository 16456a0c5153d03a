//! CLI error taxonomy with stable exit codes.

use cadence_core::calib::CalibError;
use cadence_core::payoff::OptError;
use cadence_core::sim::BatchError;
use thiserror::Error;

/// Exit codes: 0 success, 1 config error, 2 runtime failure, 3 calibration
/// failure.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
    #[error("{0}")]
    Calibration(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
            CliError::Calibration(_) => 3,
        }
    }

    /// Machine-readable kind tag for the status line.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Runtime(_) => "runtime",
            CliError::Calibration(_) => "calibration",
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("io error: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Runtime(format!("csv write error: {e}"))
    }
}

impl From<BatchError> for CliError {
    fn from(e: BatchError) -> Self {
        CliError::Runtime(format!("simulation batch failed: {e}"))
    }
}

impl From<OptError> for CliError {
    fn from(e: OptError) -> Self {
        CliError::Runtime(format!("payoff optimization failed: {e}"))
    }
}

impl From<CalibError> for CliError {
    fn from(e: CalibError) -> Self {
        match e {
            CalibError::EmptyGrid | CalibError::MalformedGrid => {
                CliError::Config(format!("calibration grid: {e}"))
            }
            CalibError::Batch(_) => CliError::Runtime(format!("calibration failed: {e}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_are_stable() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 1);
        assert_eq!(CliError::Runtime("x".into()).exit_code(), 2);
        assert_eq!(CliError::Calibration("x".into()).exit_code(), 3);
        assert_eq!(CliError::Config("x".into()).kind(), "config");
    }
}
