//! Batch experiments on characteristic series of block U_p operators:
//! configuration, the compute pipeline, and deterministic text artifacts.

pub mod config;
pub mod error;
pub mod experiment;
pub mod output;

pub use config::ExperimentConfig;
pub use error::{CheckFailure, LabError, LabResult};
pub use experiment::{run_experiment, slope_scan, ExperimentReport, Stages, Status};
