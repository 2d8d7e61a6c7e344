//! Configuration, file formats, verification and the subcommand drivers
//! behind the `katlind` binary.

pub mod commands;
pub mod config;
pub mod io;
pub mod verify;

pub use commands::CommandError;
pub use config::{ConfigError, InitialState, Integrator, RunConfig};
pub use verify::{Check, VerificationReport, VerifyPlan};
