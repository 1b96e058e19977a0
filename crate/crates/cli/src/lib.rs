//! Configuration, orchestration and data export for the helix-dipoles solvers.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::{Problem, RunConfig};
pub use error::CliError;
pub use run::{run, Outcome, Status};
