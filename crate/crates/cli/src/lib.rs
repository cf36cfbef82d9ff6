//! Library side of the `taebp` command: configuration loading and the four
//! subcommands, kept here so they can be tested without spawning processes.

// Negated float comparisons such as `!(x > 0.0)` deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analyze;
pub mod config;
pub mod simulate;
pub mod sweep;
pub mod verify;
