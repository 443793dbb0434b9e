//! Configuration, sweeps, reports and file formats for `bosonlab`.

pub mod config;
pub mod pipeline;
pub mod report;
pub mod sweep;
