//! Command-line front end: expression parser, JSON codec and subcommands.

pub mod args;
pub mod commands;
pub mod json;
pub mod parse;

pub use commands::OPERATIONS;
