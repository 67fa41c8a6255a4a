//! Problem-file parsing, command dispatch and reports for the `twistk`
//! binary.

pub mod commands;
pub mod error;
pub mod report;
pub mod resolve;
pub mod schema;

pub use commands::{run, Command, Invocation};
pub use error::CliError;
pub use report::Report;
