//! Command-line front end for the damped-wave layer-dynamics solver:
//! configuration loading, run orchestration, and bit-stable CSV/manifest
//! output.

pub mod cli;
pub mod commands;
pub mod output;

pub use cli::cli_main;
