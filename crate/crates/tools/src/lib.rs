//! File formats, network generators, a thread-backed executor and the
//! `tcn` command line built on `tcn-core`.

pub mod cli;
pub mod error;
pub mod generators;
pub mod io;
pub mod plan_file;
pub mod report;
pub mod sweep;
pub mod threads;

pub use error::{Result, ToolError};
