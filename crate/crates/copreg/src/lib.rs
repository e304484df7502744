//! File formats, parallel experiment runner and command line for
//! [`copreg_core`].

pub mod cli;
pub mod config;
pub mod density;
pub mod error;
pub mod family;
pub mod formats;
pub mod runner;

pub use error::{CliError, CliResult};
