//! Command-line front end for the `cat5-core` library.

pub mod commands;
pub mod input;

pub use commands::{dispatch, Cli, CliError, Outcome, Report};
pub use input::{parse_input, InputFormat, ParseError};
