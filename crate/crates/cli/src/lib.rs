//! Command-line orchestration of the optimal-stopping solvers: configuration
//! loading, artifact files and the subcommands.

pub mod artifacts;
pub mod commands;
pub mod error;

pub use commands::{cmd_oracle, cmd_report, cmd_simulate, cmd_solve, cmd_verify, verification_report, Overrides, Run};
pub use error::{CliError, Result};
