//! Command-line workflow and HTTP service for `hb-core` models.

pub mod cli;
pub mod commands;
pub mod error;
pub mod server;

pub use cli::{run, Cli};
pub use error::{CliError, ErrorKind};
