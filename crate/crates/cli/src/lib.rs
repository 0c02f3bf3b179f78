//! Experiment front end for `ttvqe`: TOML sweep configs, a lattice runner
//! writing CSV/JSON results with a manifest, and wall-time reports.

pub mod config;
pub mod runner;
pub mod selftest;
pub mod timing;

pub use config::ExperimentConfig;
pub use runner::{read_rows, run_experiment, Row, RunOptions, RunSummary, COLUMNS};
pub use timing::{timing_report, TimingRow};
