//! Library side of the `graphheat` command-line tool: problem files, trajectory
//! CSV, SVG charts and the subcommands.

pub mod commands;
pub mod error;
pub mod problem_file;
pub mod svg;
pub mod table;

pub use error::{CliError, CliResult};
