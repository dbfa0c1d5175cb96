//! Configuration, orchestration and reporting for the mdlab checks.

pub mod checks;
pub mod config;
pub mod error;
pub mod report;
pub mod sweep;

pub use checks::{run, run_all, run_check, CheckName, CheckReport};
pub use config::LabConfig;
pub use error::{LabError, Result};
pub use report::{emit_report, read_csv, read_jsonl, write_csv, write_jsonl, ReportFormat, SCHEMA};
pub use sweep::{run_sweep, sweep_points, SweepOutcome};
