//! Config-driven runner for the sum-rule pipelines of `trk-core`.
//!
//! A job is described by a TOML file (see [`config`]), executed by
//! [`runner::run_job`] and written out by [`report::write_report`].

pub mod config;
pub mod error;
pub mod report;
pub mod runner;

pub use config::{load_config, parse_config, JobConfig, JobKind};
pub use error::{LabError, LabResult};
pub use runner::{run_job, RunReport};
