//! File formats, scenarios and parallel pipelines around `circaphase-core`.
//!
//! The `circaphase` binary exposes these as subcommands; everything here is
//! also usable as a library.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod compare;
pub mod config;
pub mod csv_io;
pub mod dam;
pub mod error;
pub mod load;
pub mod output;
pub mod pipeline;
pub mod scenario;

pub use circaphase_core as core;
pub use error::{AppError, AppResult};
