//! Configuration, sweeps, output and the command-line front end for
//! `lambdacool-core`.

// Guards are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod check;
pub mod cli;
pub mod config;
pub mod error;
pub mod observe;
pub mod output;
pub mod presets;
pub mod sweep;
