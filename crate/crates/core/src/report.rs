use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Halt;

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    TargetReached,
    GlobalStall,
    TimeBudget,
    EvalBudget,
    IterBudget,
}

impl Termination {
    pub(crate) fn from_halt(h: Halt) -> Self {
        match h {
            Halt::Target => Termination::TargetReached,
            Halt::TimeBudget => Termination::TimeBudget,
            Halt::EvalBudget | Halt::SubBudget => Termination::EvalBudget,
        }
    }
}

/// Which part of a solver produced a trace row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// Plain DIRECT iteration.
    Direct,
    /// Starting-point selection.
    Start,
    /// Single-coordinate (or first block size) subproblems.
    Coordinate,
    /// Local optimizer run.
    Local,
    /// Block subproblems after the switch.
    Block,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Direct => "direct",
            Phase::Start => "start",
            Phase::Coordinate => "coordinate",
            Phase::Local => "local",
            Phase::Block => "block",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "direct" => Phase::Direct,
            "start" => Phase::Start,
            "coordinate" => Phase::Coordinate,
            "local" => Phase::Local,
            "block" => Phase::Block,
            _ => return None,
        })
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One convergence-trace point.
///
/// `step` is the DIRECT iteration for plain runs and the subproblem index
/// for block coordinate runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub eval: u64,
    pub step: usize,
    pub phase: Phase,
    pub f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub best_f: f64,
    /// Best point in user coordinates.
    pub best_x: Vec<f64>,
    pub evals: u64,
    /// DIRECT iterations, or subproblems for block coordinate runs.
    pub iterations: usize,
    pub elapsed_seconds: f64,
    pub termination: Termination,
    pub trace: Vec<TraceRow>,
}

impl RunReport {
    /// True when the trace's objective column never increases.
    pub fn trace_is_monotone(&self) -> bool {
        self.trace.windows(2).all(|w| w[1].f <= w[0].f)
    }
}
