//! Batch driver for `framekit`: instance files, suite configs, and the
//! `gen`, `check` and `suite` commands behind the `framekit` binary.

pub mod commands;
pub mod config;
pub mod instance_file;
pub mod suite;
