//! Experiment runner for the hard-core model toolkit: file formats,
//! declarative configs, structured reports, parallel replicates, the
//! verification suites and the `hardcore-lab` command line.

pub mod cli;
pub mod config;
pub mod error;
pub mod formats;
pub mod report;
pub mod runner;
pub mod verify;

pub use error::{LabError, Result};
