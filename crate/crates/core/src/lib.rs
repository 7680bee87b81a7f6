//! Label-frugal optimization over tabular example spaces.
//!
//! Rows carry cheap independent attributes (`x`) and expensive goal
//! attributes (`y`). Everything here works on summaries of those rows: a
//! mixed numeric/symbolic distance over `x`, a distance-to-heaven score over
//! `y`, and a two-class naive Bayes model that drives the acquisition loop.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the experiment
//! harness and the review service live in the `lite` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod column;
mod config;
mod data;
mod error;
pub mod lite;
pub mod oracle;
pub mod random;
pub mod stats;
pub mod sway;
mod value;

pub use column::{Column, ColumnSpec, Goal, Header, NumSummary, SymSummary, EPSILON};
pub use config::Config;
pub use data::{d2h_in_frame, Dataset};
pub use error::{Error, OracleError, Result};
pub use lite::{lite_run, Lite, LiteResult, Policy};
pub use oracle::{CachedOracle, Oracle};
pub use random::{hamlet_n, random_n};
pub use sway::{sway_best, sway_run, SwayResult};
pub use value::{Cell, Row};
