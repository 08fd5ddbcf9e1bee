//! DIRECT (DIviding RECTangles) global search over a box.

mod partition;
mod poh;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use partition::{measure, PartitionState, Rectangle, MAX_LEVEL};
pub use poh::{potentially_optimal, HullPoint};

use crate::error::{Error, EvalError, Halt, Result};
use crate::problem::{normalize, EvalCounter, Problem, Target};
use crate::report::{Phase, RunReport, Termination, TraceRow};

/// Stop after `patience` consecutive iterations whose best-value decrease
/// is at most `eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StallRule {
    pub eps: f64,
    pub patience: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DirectConfig {
    /// Required relative improvement in the potential-optimality test.
    pub eps: f64,
    pub max_iters: Option<usize>,
    pub max_evals: Option<u64>,
    pub max_wall_seconds: Option<f64>,
    /// Stop once `|f - f*| <= target_accuracy`; only used when the problem
    /// carries a known optimum.
    pub target_accuracy: Option<f64>,
    pub stall: Option<StallRule>,
    /// Stop when the smallest rectangle measure drops below this value.
    pub min_measure: Option<f64>,
}

impl Default for DirectConfig {
    fn default() -> Self {
        Self {
            eps: 1e-4,
            max_iters: None,
            max_evals: Some(200_000),
            max_wall_seconds: None,
            target_accuracy: Some(1e-4),
            stall: None,
            min_measure: None,
        }
    }
}

impl DirectConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps.is_finite() && self.eps >= 0.0) {
            return Err(Error::Config(format!("eps must be a finite non-negative number, got {}", self.eps)));
        }
        if self.max_evals == Some(0) {
            return Err(Error::Config("max_evals must be at least 1".into()));
        }
        if let Some(t) = self.max_wall_seconds {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::Config(format!("max_wall_seconds must be positive, got {t}")));
            }
        }
        if let Some(a) = self.target_accuracy {
            if !(a.is_finite() && a >= 0.0) {
                return Err(Error::Config(format!("target_accuracy must be non-negative, got {a}")));
            }
        }
        if let Some(s) = self.stall {
            if s.patience == 0 || !(s.eps >= 0.0) {
                return Err(Error::Config("stall rule needs patience >= 1 and eps >= 0".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum DirectStop {
    Halted(Halt),
    IterCap,
    Stall,
    MinMeasure,
    /// Every rectangle reached the division depth limit.
    Exhausted,
}

#[derive(Debug, Clone)]
pub(crate) struct DirectOutcome {
    /// Best user-space point and value, if anything was evaluated.
    pub best: Option<(Vec<f64>, f64)>,
    pub iterations: usize,
    pub stop: DirectStop,
}

/// Runs DIRECT on `problem`, charging `counter`. `observer` sees the
/// partition after initialization (iteration 0) and after every iteration,
/// together with the evaluation count.
pub(crate) fn run_direct(
    problem: &Problem,
    cfg: &DirectConfig,
    counter: &mut EvalCounter,
    mut observer: impl FnMut(usize, u64, &PartitionState),
) -> Result<DirectOutcome> {
    let unit = normalize(problem)?;
    let n = problem.dim();
    let mut best: Option<(Vec<f64>, f64)> = None;

    let f0 = match unit.evaluate(&vec![0.5; n], counter) {
        Ok((f, x)) => {
            best = Some((x, f));
            f
        }
        Err(EvalError::Halted(h)) => {
            return Ok(DirectOutcome {
                best,
                iterations: 0,
                stop: DirectStop::Halted(h),
            })
        }
        Err(e) => return Err(e.into()),
    };
    let mut state = PartitionState::new(n, f0);
    observer(0, counter.count(), &state);

    let mut iterations = 0;
    let mut streak = 0;
    let mut prev = f0;
    let stop = loop {
        if let Some(h) = counter.check() {
            break DirectStop::Halted(h);
        }
        if cfg.max_iters.is_some_and(|m| iterations >= m) {
            break DirectStop::IterCap;
        }
        if cfg.min_measure.is_some_and(|m| state.smallest_measure() < m) {
            break DirectStop::MinMeasure;
        }
        let selected = state.identify_poh(cfg.eps);
        if selected.is_empty() {
            break DirectStop::Exhausted;
        }
        let mut halted = None;
        for id in selected {
            let mut eval = |z: &[f64]| {
                let (f, x) = unit.evaluate(z, counter)?;
                if best.as_ref().map_or(true, |b| f < b.1) {
                    best = Some((x, f));
                }
                Ok(f)
            };
            match state.sample_and_divide(id, &mut eval) {
                Ok(_) => {}
                Err(EvalError::Halted(h)) => {
                    halted = Some(h);
                    break;
                }
                Err(e) => return Err(e.into()),
            }
        }
        iterations += 1;
        observer(iterations, counter.count(), &state);
        if let Some(h) = halted {
            break DirectStop::Halted(h);
        }
        if let Some(rule) = cfg.stall {
            if prev - state.f_min() <= rule.eps {
                streak += 1;
            } else {
                streak = 0;
            }
            prev = state.f_min();
            if streak >= rule.patience {
                break DirectStop::Stall;
            }
        }
    };
    Ok(DirectOutcome {
        best,
        iterations,
        stop,
    })
}

pub(crate) fn target_for(problem: &Problem, accuracy: Option<f64>) -> Option<Target> {
    match (problem.known_optimum(), accuracy) {
        (Some(value), Some(accuracy)) => Some(Target { value, accuracy }),
        _ => None,
    }
}

/// Runs DIRECT to one of the configured stopping conditions.
pub fn direct_solve(problem: &Problem, cfg: &DirectConfig) -> Result<RunReport> {
    direct_solve_observed(problem, cfg, |_, _| {})
}

/// [`direct_solve`] with a hook that sees the partition after every iteration.
pub fn direct_solve_observed(
    problem: &Problem,
    cfg: &DirectConfig,
    mut observer: impl FnMut(usize, &PartitionState),
) -> Result<RunReport> {
    cfg.validate()?;
    let started = Instant::now();
    let mut counter = EvalCounter::new();
    counter
        .set_cap(cfg.max_evals)
        .set_time_budget(cfg.max_wall_seconds.map(Duration::from_secs_f64))
        .set_target(target_for(problem, cfg.target_accuracy));

    let mut trace = Vec::new();
    let outcome = run_direct(problem, cfg, &mut counter, |it, evals, state| {
        trace.push(TraceRow {
            eval: evals,
            step: it,
            phase: Phase::Direct,
            f: state.f_min(),
        });
        observer(it, state);
    })?;

    let (best_x, best_f) = outcome
        .best
        .unwrap_or_else(|| (problem.bounds().center(), f64::INFINITY));
    let termination = if counter.target_hit() {
        Termination::TargetReached
    } else {
        match outcome.stop {
            DirectStop::Halted(h) => Termination::from_halt(h),
            DirectStop::IterCap => Termination::IterBudget,
            DirectStop::Stall | DirectStop::MinMeasure | DirectStop::Exhausted => Termination::GlobalStall,
        }
    };
    Ok(RunReport {
        best_f,
        best_x,
        evals: counter.count(),
        iterations: outcome.iterations,
        elapsed_seconds: started.elapsed().as_secs_f64(),
        termination,
        trace,
    })
}
