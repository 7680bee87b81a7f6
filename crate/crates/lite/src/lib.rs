//! Experiment harness, result reports and the review service around
//! `lite-core`.

pub mod harness;
pub mod io;
pub mod oracle;
pub mod report;
pub mod results;
pub mod service;
