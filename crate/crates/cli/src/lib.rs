//! Library side of the `zomd` command-line runner: config schema, report
//! writers, and the subcommand implementations. The binary in `main.rs` is
//! a thin argument-parsing shell over [`commands`].

pub mod commands;
pub mod config;
pub mod report;
