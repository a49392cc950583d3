//! File formats, data loading, property checks and the `dfot` command line
//! on top of [`dfot_core`].
//!
//! Exit codes: 0 success, 1 failed verification, 2 bad input, 3 infeasible
//! marginals.

pub mod cli;
pub mod io;
pub mod parkinsons_csv;
pub mod verify;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("output error: {0}")]
    Output(String),
}

impl AppError {
    pub fn input(msg: impl Into<String>) -> Self {
        AppError::Input(msg.into())
    }

    pub fn output(msg: impl Into<String>) -> Self {
        AppError::Output(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Verification(_) => 1,
            AppError::Input(_) | AppError::Output(_) => 2,
            AppError::Infeasible(_) => 3,
        }
    }
}

impl From<dfot_core::Error> for AppError {
    fn from(e: dfot_core::Error) -> Self {
        match e {
            dfot_core::Error::Infeasible { .. } => AppError::Infeasible(e.to_string()),
            other => AppError::Input(other.to_string()),
        }
    }
}

/// Bundled example inputs.
pub mod fixtures {
    pub const POLYTOPE: &str = include_str!("../fixtures/polytope.json");
    pub const MU: &str = include_str!("../fixtures/mu.json");
    pub const NU: &str = include_str!("../fixtures/nu.json");
    pub const SINGLE_X: &str = include_str!("../fixtures/single_x.json");
    pub const SINGLE_Y: &str = include_str!("../fixtures/single_y.json");
}
