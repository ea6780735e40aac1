//! Library side of the `frackpz` command: configuration parsing and subcommands.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod run;
