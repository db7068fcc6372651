//! Command-line front end and experiment harness for `ctfield`.

// Negated float comparisons are used on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod experiments;
pub mod plot;

pub use commands::{run, Cli};
pub use error::{CliError, CliResult};
