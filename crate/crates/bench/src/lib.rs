//! Benchmark harness around `abcd-core`: run specifications, repetition
//! protocol, suite aggregation and trace export.

pub mod error;
pub mod run;
pub mod spec;
pub mod suite;
pub mod trace;

pub use error::{BenchError, Result};
pub use run::{run_one, run_one_with, RunRecord};
pub use spec::{hedar_suite, jones_suite, Algorithm, RunSpec, SuiteFile};
pub use suite::{run_suite, SuiteReport, SuiteRow};
pub use trace::{export_trace, read_trace, write_records};
