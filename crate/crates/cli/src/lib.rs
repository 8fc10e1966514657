//! Library side of the `nilcurv` binary: run configuration, subcommand
//! implementations and the acceptance suite.

pub mod acceptance;
pub mod commands;
pub mod config;
