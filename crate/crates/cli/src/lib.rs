//! Command-line harness for the four-tank benchmark: configuration files,
//! CSV traces and the subcommands behind the `cdstate` binary.

pub mod commands;
pub mod config;
pub mod io;
