//! Command-line front end for `pertexp-core`: built-in and file-defined systems,
//! expansion runs with reference comparison, effective Hamiltonians and convergence horizons.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod system_file;

pub use config::{RunConfig, SystemSource};
pub use error::{CliError, CliResult};
