//! Box-constrained global optimization with DIRECT and adaptive block
//! coordinate DIRECT, plus a local quasi-Newton polisher and a library of
//! standard test functions.

pub mod abcd;
pub mod direct;
pub mod error;
pub mod local;
pub mod problem;
pub mod report;
pub mod testbed;

pub use abcd::{abcd_solve, local_solve, AbcdConfig, SelectMode};
pub use direct::{direct_solve, direct_solve_observed, DirectConfig, StallRule};
pub use local::{sqp_local, LocalConfig, LocalResult, LocalStatus};
pub use error::{Error, EvalError, Halt, Result};
pub use problem::{denormalize, evaluate_counted, normalize, Bounds, EvalCounter, NormalizedProblem, Objective, Problem, Target};
pub use report::{Phase, RunReport, Termination, TraceRow};
