//! Command-line driver: argument parsing, the abstract self-test and the
//! JSON/CSV report formats.

pub mod commands;
pub mod config;
pub mod report;
pub mod selftest;

pub use commands::{run, EXIT_NUMERICAL, EXIT_OK, EXIT_THRESHOLD, EXIT_USAGE};
