//! Front end for `symcache-core`: scheme description files, text formats
//! and the `symcache` command line.

pub mod cli;
pub mod config;
pub mod error;
pub mod instance;
pub mod render;

pub use error::CliError;
