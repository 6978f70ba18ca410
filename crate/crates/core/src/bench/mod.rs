//! Experiment configuration, orchestration and result output for the
//! `dqj-bench` binary.

pub mod config;
pub mod output;
pub mod runner;

pub use config::{ExperimentConfig, MethodConfig, Metric, ModelConfig, OutputFormat, RecordPolicy, SubstepPolicy, Sweep};
pub use output::{emit, parse_csv, parse_json, ResultRow, COLUMNS};
pub use runner::{run_experiment, run_sweep, Runner};
