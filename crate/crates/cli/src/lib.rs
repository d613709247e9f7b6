//! Library side of the `dcsk-nc` command: config parsing, CSV tables and
//! the command implementations.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;

/// Environment variable overriding the number of simulation threads.
pub const WORKERS_ENV: &str = "DCSK_WORKERS";
