//! Experiment harness and reporting around `isalsr-core`.

pub mod experiments;
pub mod report;
pub mod stats;
