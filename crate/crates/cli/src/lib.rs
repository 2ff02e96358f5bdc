//! Experiment runner: scenario presets, run outputs and grid-convergence checks.

pub mod output;
pub mod scenario;
pub mod validate;

pub use output::{run, RunError, RunOutput, RunSummary};
pub use scenario::{resolve_config, Scenario};
pub use validate::{validate, GridSize, ValidationReport};

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const CONFIG: i32 = 1;
    pub const NUMERICAL: i32 = 2;
    pub const ACCEPTANCE: i32 = 3;
}
