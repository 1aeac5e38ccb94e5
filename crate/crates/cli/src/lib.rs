//! Reproducible experiment runs for the Hartree laboratory.
//!
//! A run reads one [`ExperimentConfig`], dispatches to the numerical core and
//! writes a self-describing directory. [`report`] summarizes such a directory.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod report;

pub use config::{ExperimentConfig, Kind, Params};
pub use error::{RunError, RunResult};
pub use output::{default_output_dir, run};
pub use report::report;
