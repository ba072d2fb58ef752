//! Seeded experiment sweeps over the Gaussian-atom registration model.
//!
//! Each sweep is a pure function of its [`SweepConfig`]; the `gaussreg`
//! binary wraps them as subcommands that write CSV.

// `!(x > 0)` style checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod sweeps;

pub use config::{PatternSource, SweepConfig};
pub use sweeps::{
    error_cells, grid_counts, run_bounds_report, run_decompose, run_error_sweep, run_grid_count,
    run_register, run_siden_sweep, siden_trials, ErrorCell, SidenTrial, REGISTRATION_TOL,
};

#[derive(Debug, thiserror::Error)]
pub enum ExpError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(gaussreg_core::Error),
    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
}

impl ExpError {
    /// Process exit code: 1 for configuration problems, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExpError::Config(_) => 1,
            _ => 2,
        }
    }
}

impl From<gaussreg_core::Error> for ExpError {
    /// Unreadable or malformed inputs are configuration problems; the rest
    /// come from the numerics.
    fn from(e: gaussreg_core::Error) -> Self {
        use gaussreg_core::Error as E;
        match e {
            E::Io(_) | E::Parse(_) | E::InvalidArgument(_) => ExpError::Config(e.to_string()),
            other => ExpError::Numeric(other),
        }
    }
}
