//! File formats, commands and reports behind the `hydrodef` binary.

pub mod commands;
pub mod problem;
pub mod report;

pub use commands::{CheckKind, CliError, Options};
pub use problem::{ProblemFile, SyntaxError};
pub use report::Report;
