//! Experiment runner, reports and command line for beacon discovery
//! schedules.

pub mod cli;
pub mod experiment;
pub mod report;

pub use experiment::{
    run_experiment, Aggregate, CellFailure, ComparisonRow, EmdtReference, Estimate, ExperimentConfig, ExperimentTable,
    ReportPaths, SetSource,
};
pub use report::emit_reports;
