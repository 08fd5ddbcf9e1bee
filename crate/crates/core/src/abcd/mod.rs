//! Adaptive block coordinate DIRECT.
//!
//! The search alternates DIRECT runs on low-dimensional subproblems, each
//! varying a block of coordinates around the incumbent. It starts with
//! sequential blocks of size `m1`; when `t1` consecutive subproblems fail to
//! improve by more than `switch_eps`, it runs the local optimizer once from
//! the incumbent and continues with random blocks of size `m2`.

mod coords;

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use coords::{
    choose_start, default_q, embed, make_subproblem, sample_start, stall_update, CoordinateSelector, SelectMode,
};

use crate::direct::{run_direct, target_for, DirectConfig, DirectStop, StallRule};
use crate::error::{Error, EvalError, Halt, Result};
use crate::local::{sqp_from, LocalConfig, LocalStatus};
use crate::problem::{EvalCounter, Problem};
use crate::report::{Phase, RunReport, Termination, TraceRow};

const START_STREAM: u64 = 0;
const COORD_STREAM: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AbcdConfig {
    /// Block size before the switch.
    pub m1: usize,
    /// Block size after the switch.
    pub m2: usize,
    /// Stalled subproblems that trigger the switch.
    pub t1: usize,
    /// A subproblem stalls when it improves the incumbent by at most this.
    pub switch_eps: f64,
    pub switch_enabled: bool,
    pub local_enabled: bool,
    /// Run the local optimizer before the first subproblem instead of at the switch.
    pub sqp_first: bool,
    pub phase1_mode: SelectMode,
    pub phase3_mode: SelectMode,
    /// Stop once `|f - f*| <= target_accuracy`, when the problem has a known optimum.
    pub target_accuracy: Option<f64>,
    /// Stop the final block loop after `global_stall_patience` consecutive
    /// subproblems improving by at most this. Applies after the switch, or
    /// to the first loop when the switch is disabled.
    pub global_stall_eps: Option<f64>,
    /// Defaults to `min(n, 6)`.
    pub global_stall_patience: Option<usize>,
    /// DIRECT selection tolerance inside subproblems.
    pub eps: f64,
    /// Evaluation cap per subproblem; defaults to `100 * block size`.
    pub sub_eval_cap: Option<u64>,
    /// A subproblem ends when its smallest rectangle measure drops below this.
    pub sub_min_measure: Option<f64>,
    /// A subproblem ends when its best value stalls under this rule.
    pub sub_stall: Option<StallRule>,
    pub max_evals: Option<u64>,
    pub max_subproblems: Option<usize>,
    pub max_wall_seconds: Option<f64>,
    /// Starting samples; defaults to `min(2n, 32)`.
    pub q: Option<usize>,
    pub seed: u64,
    pub local: LocalConfig,
}

impl Default for AbcdConfig {
    fn default() -> Self {
        Self {
            m1: 1,
            m2: 2,
            t1: 3,
            switch_eps: 1e-3,
            switch_enabled: true,
            local_enabled: true,
            sqp_first: false,
            phase1_mode: SelectMode::Sequential,
            phase3_mode: SelectMode::Random,
            target_accuracy: Some(1e-4),
            global_stall_eps: Some(1e-6),
            global_stall_patience: None,
            eps: 1e-4,
            sub_eval_cap: None,
            sub_min_measure: Some(1e-6),
            sub_stall: Some(StallRule {
                eps: 1e-8,
                patience: 5,
            }),
            max_evals: Some(200_000),
            max_subproblems: None,
            max_wall_seconds: None,
            q: None,
            seed: 0,
            local: LocalConfig::default(),
        }
    }
}

impl AbcdConfig {
    /// Coordinate-only variant: block size `m1` throughout, no switch and no
    /// local optimizer.
    pub fn coordinate_only(m1: usize) -> Self {
        Self {
            m1,
            switch_enabled: false,
            local_enabled: false,
            ..Self::default()
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.m1 == 0 || self.m1 > n || self.m2 == 0 || self.m2 > n {
            return bad(format!("block sizes must lie in 1..={n}, got m1 = {}, m2 = {}", self.m1, self.m2));
        }
        if self.t1 == 0 {
            return bad("t1 must be at least 1".into());
        }
        if !(self.switch_eps > 0.0 && self.switch_eps.is_finite()) {
            return bad(format!("switch_eps must be positive, got {}", self.switch_eps));
        }
        if self.q == Some(0) {
            return bad("q must be at least 1".into());
        }
        if self.sub_eval_cap == Some(0) || self.max_evals == Some(0) || self.max_subproblems == Some(0) {
            return bad("evaluation and subproblem caps must be at least 1".into());
        }
        if self.global_stall_patience == Some(0) {
            return bad("global_stall_patience must be at least 1".into());
        }
        if let Some(e) = self.global_stall_eps {
            if !(e >= 0.0) {
                return bad(format!("global_stall_eps must be non-negative, got {e}"));
            }
        }
        if let Some(t) = self.max_wall_seconds {
            if !(t > 0.0 && t.is_finite()) {
                return bad(format!("max_wall_seconds must be positive, got {t}"));
            }
        }
        if let Some(a) = self.target_accuracy {
            if !(a >= 0.0 && a.is_finite()) {
                return bad(format!("target_accuracy must be non-negative, got {a}"));
            }
        }
        let sub = self.sub_direct_config();
        sub.validate()?;
        if self.local_enabled || self.sqp_first {
            self.local.validate()?;
        }
        Ok(())
    }

    fn sub_direct_config(&self) -> DirectConfig {
        DirectConfig {
            eps: self.eps,
            max_iters: None,
            max_evals: None,
            max_wall_seconds: None,
            target_accuracy: None,
            stall: self.sub_stall,
            min_measure: self.sub_min_measure,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage {
    Coordinate,
    Local,
    Block,
}

enum Stop {
    Halted(Halt),
    Stall,
    Subproblems,
}

struct Run<'a> {
    problem: &'a Problem,
    cfg: &'a AbcdConfig,
    counter: EvalCounter,
    x: Vec<f64>,
    f: f64,
    trace: Vec<TraceRow>,
    subproblems: usize,
}

impl Run<'_> {
    fn record(&mut self, phase: Phase) {
        self.trace.push(TraceRow {
            eval: self.counter.count(),
            step: self.subproblems,
            phase,
            f: self.f,
        });
    }

    /// One DIRECT subproblem over `idx`. Returns the halt that ended the
    /// whole run, if any.
    fn subproblem(&mut self, idx: &[usize], phase: Phase) -> Result<Option<Halt>> {
        let sub = make_subproblem(self.problem, &self.x, idx);
        let cap = self.cfg.sub_eval_cap.unwrap_or(100 * idx.len() as u64);
        let dcfg = self.cfg.sub_direct_config();
        let outcome = self
            .counter
            .with_sublimit(cap, |c| run_direct(&sub, &dcfg, c, |_, _, _| {}))?;
        self.subproblems += 1;
        if let Some((y, fy)) = outcome.best {
            if fy < self.f {
                let x = embed(&self.x, idx, &y);
                debug_assert!(
                    (self.problem.eval_uncounted(&x) - fy).abs() <= 1e-12 * fy.abs().max(1.0),
                    "subproblem value does not reproduce on the full problem"
                );
                self.x = x;
                self.f = fy;
            }
        }
        self.record(phase);
        Ok(match outcome.stop {
            DirectStop::Halted(Halt::SubBudget) => None,
            DirectStop::Halted(h) => Some(h),
            _ => None,
        })
    }

    fn local(&mut self) -> Result<Option<Halt>> {
        let f0 = self.f.is_finite().then_some(self.f);
        let r = sqp_from(self.problem, &self.x, f0, &self.cfg.local, &mut self.counter)?;
        if r.f < self.f {
            self.x = r.x;
            self.f = r.f;
        }
        self.record(Phase::Local);
        Ok(match r.status {
            LocalStatus::BudgetExhausted => self.counter.check(),
            _ => None,
        })
    }
}

/// Runs adaptive block coordinate DIRECT on `problem`.
pub fn abcd_solve(problem: &Problem, cfg: &AbcdConfig) -> Result<RunReport> {
    let n = problem.dim();
    cfg.validate(n)?;
    let started = Instant::now();
    let mut counter = EvalCounter::new();
    counter
        .set_cap(cfg.max_evals)
        .set_time_budget(cfg.max_wall_seconds.map(Duration::from_secs_f64))
        .set_target(target_for(problem, cfg.target_accuracy));

    let mut start_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    start_rng.set_stream(START_STREAM);
    let mut coord_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    coord_rng.set_stream(COORD_STREAM);
    let mut selector = CoordinateSelector::new(n, coord_rng);

    let mut run = Run {
        problem,
        cfg,
        counter,
        x: problem.bounds().center(),
        f: f64::INFINITY,
        trace: Vec::new(),
        subproblems: 0,
    };

    // Full-width first blocks ignore the incumbent, so no start is needed.
    let need_start = cfg.sqp_first || cfg.m1 < n;
    let mut stop = None;
    if need_start {
        let q = cfg.q.unwrap_or_else(|| default_q(n));
        let (best, err) = sample_start(problem, q, &mut start_rng, &mut run.counter);
        if let Some((x, f)) = best {
            run.x = x;
            run.f = f;
            run.record(Phase::Start);
        }
        match err {
            Some(EvalError::Halted(h)) => stop = Some(Stop::Halted(h)),
            Some(e) => return Err(e.into()),
            None => {}
        }
    }

    let patience = cfg.global_stall_patience.unwrap_or(n.min(6));
    let mut stage = if cfg.sqp_first { Stage::Local } else { Stage::Coordinate };
    let mut local_done = false;
    let mut switch_streak = 0;
    let mut stall_streak = 0;
    let stop = match stop {
        Some(s) => s,
        None => loop {
            if let Some(h) = run.counter.check() {
                break Stop::Halted(h);
            }
            if stage != Stage::Local && cfg.max_subproblems.is_some_and(|m| run.subproblems >= m) {
                break Stop::Subproblems;
            }
            let f_prev = run.f;
            match stage {
                Stage::Local => {
                    local_done = true;
                    let halted = run.local()?;
                    stage = if cfg.sqp_first { Stage::Coordinate } else { Stage::Block };
                    if let Some(h) = halted {
                        break Stop::Halted(h);
                    }
                }
                Stage::Coordinate => {
                    let idx = selector.select(cfg.m1, cfg.phase1_mode)?;
                    if let Some(h) = run.subproblem(&idx, Phase::Coordinate)? {
                        break Stop::Halted(h);
                    }
                    if cfg.switch_enabled {
                        let (streak, switched) = stall_update(switch_streak, f_prev, run.f, cfg.switch_eps, cfg.t1);
                        switch_streak = streak;
                        if switched {
                            stage = if cfg.local_enabled && !local_done {
                                Stage::Local
                            } else {
                                Stage::Block
                            };
                        }
                    } else if let Some(eps) = cfg.global_stall_eps {
                        let (streak, stalled) = stall_update(stall_streak, f_prev, run.f, eps, patience);
                        stall_streak = streak;
                        if stalled {
                            break Stop::Stall;
                        }
                    }
                }
                Stage::Block => {
                    let idx = selector.select(cfg.m2, cfg.phase3_mode)?;
                    if let Some(h) = run.subproblem(&idx, Phase::Block)? {
                        break Stop::Halted(h);
                    }
                    if let Some(eps) = cfg.global_stall_eps {
                        let (streak, stalled) = stall_update(stall_streak, f_prev, run.f, eps, patience);
                        stall_streak = streak;
                        if stalled {
                            break Stop::Stall;
                        }
                    }
                }
            }
        },
    };

    let reached = run
        .counter
        .target()
        .is_some_and(|t| t.reached(run.f));
    let termination = if reached {
        Termination::TargetReached
    } else {
        match stop {
            Stop::Halted(Halt::Target) => {
                debug_assert!(false, "target latch without a matching incumbent");
                Termination::GlobalStall
            }
            Stop::Halted(h) => Termination::from_halt(h),
            Stop::Stall => Termination::GlobalStall,
            Stop::Subproblems => Termination::IterBudget,
        }
    };
    Ok(RunReport {
        best_f: run.f,
        best_x: run.x,
        evals: run.counter.count(),
        iterations: run.subproblems,
        elapsed_seconds: started.elapsed().as_secs_f64(),
        termination,
        trace: run.trace,
    })
}

/// The local optimizer alone, started from the same optimistic start as
/// [`abcd_solve`]. Uses the start, budget, target and local settings of `cfg`.
pub fn local_solve(problem: &Problem, cfg: &AbcdConfig) -> Result<RunReport> {
    let n = problem.dim();
    cfg.local.validate()?;
    let started = Instant::now();
    let mut counter = EvalCounter::new();
    counter
        .set_cap(cfg.max_evals)
        .set_time_budget(cfg.max_wall_seconds.map(Duration::from_secs_f64))
        .set_target(target_for(problem, cfg.target_accuracy));
    let mut start_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    start_rng.set_stream(START_STREAM);

    let mut run = Run {
        problem,
        cfg,
        counter,
        x: problem.bounds().center(),
        f: f64::INFINITY,
        trace: Vec::new(),
        subproblems: 0,
    };
    let q = cfg.q.unwrap_or_else(|| default_q(n));
    let (best, err) = sample_start(problem, q, &mut start_rng, &mut run.counter);
    if let Some((x, f)) = best {
        run.x = x;
        run.f = f;
        run.record(Phase::Start);
    }
    let mut status = None;
    let halt = match err {
        Some(EvalError::Halted(h)) => Some(h),
        Some(e) => return Err(e.into()),
        None => {
            let r = sqp_from(problem, &run.x, Some(run.f), &cfg.local, &mut run.counter)?;
            if r.f < run.f {
                run.x = r.x;
                run.f = r.f;
            }
            run.record(Phase::Local);
            status = Some(r.status);
            match r.status {
                LocalStatus::BudgetExhausted => run.counter.check(),
                _ => None,
            }
        }
    };

    let reached = run.counter.target().is_some_and(|t| t.reached(run.f));
    let termination = match (reached, halt, status) {
        (true, _, _) => Termination::TargetReached,
        (false, Some(h), _) if h != Halt::Target => Termination::from_halt(h),
        (false, _, Some(LocalStatus::IterCap)) => Termination::IterBudget,
        _ => Termination::GlobalStall,
    };
    Ok(RunReport {
        best_f: run.f,
        best_x: run.x,
        evals: run.counter.count(),
        iterations: status.map_or(0, |_| 1),
        elapsed_seconds: started.elapsed().as_secs_f64(),
        termination,
        trace: run.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Bounds;

    fn sphere(n: usize) -> Problem {
        Problem::new(
            |x: &[f64]| x.iter().map(|v| (v - 0.3).powi(2)).sum(),
            Bounds::uniform(n, -4.0, 6.0).unwrap(),
        )
        .with_known_optimum(0.0)
    }

    #[test]
    fn solves_shifted_sphere() {
        let r = abcd_solve(&sphere(6), &AbcdConfig::default()).unwrap();
        assert_eq!(r.termination, Termination::TargetReached);
        assert!(r.best_f <= 1e-4);
        assert!(r.trace_is_monotone());
    }

    #[test]
    fn rejects_oversized_blocks() {
        let cfg = AbcdConfig {
            m2: 7,
            ..AbcdConfig::default()
        };
        assert!(abcd_solve(&sphere(6), &cfg).is_err());
    }

    #[test]
    fn eval_cap_is_exact() {
        let cfg = AbcdConfig {
            max_evals: Some(333),
            target_accuracy: None,
            global_stall_eps: None,
            ..AbcdConfig::default()
        };
        let r = abcd_solve(&sphere(4), &cfg).unwrap();
        assert_eq!(r.evals, 333);
        assert_eq!(r.termination, Termination::EvalBudget);
    }

    #[test]
    fn single_evaluation_budget() {
        let cfg = AbcdConfig {
            max_evals: Some(1),
            ..AbcdConfig::default()
        };
        let r = abcd_solve(&sphere(3), &cfg).unwrap();
        assert_eq!(r.evals, 1);
        assert_eq!(r.termination, Termination::EvalBudget);
        assert!(r.best_f.is_finite());
        assert_eq!(r.best_f, sphere(3).eval_uncounted(&r.best_x));

        let r = local_solve(&sphere(3), &cfg).unwrap();
        assert_eq!(r.evals, 1);
        assert_eq!(r.termination, Termination::EvalBudget);
    }

    #[test]
    fn local_only_run() {
        let r = local_solve(&sphere(4), &AbcdConfig::default()).unwrap();
        assert_eq!(r.termination, Termination::TargetReached);
        let phases: Vec<Phase> = r.trace.iter().map(|t| t.phase).collect();
        assert_eq!(phases, vec![Phase::Start, Phase::Local]);
    }

    #[test]
    fn phases_follow_order() {
        let p = Problem::new(
            |x: &[f64]| x.windows(2).map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (w[0] - 1.0).powi(2)).sum(),
            Bounds::uniform(6, -5.0, 10.0).unwrap(),
        )
        .with_known_optimum(0.0);
        let r = abcd_solve(&p, &AbcdConfig::default()).unwrap();
        let phases: Vec<Phase> = r.trace.iter().map(|t| t.phase).collect();
        assert_eq!(phases[0], Phase::Start);
        let rank = |p: &Phase| match p {
            Phase::Start => 0,
            Phase::Coordinate => 1,
            Phase::Local => 2,
            Phase::Block => 3,
            Phase::Direct => 4,
        };
        assert!(phases.windows(2).all(|w| rank(&w[0]) <= rank(&w[1])));
        assert!(phases.iter().filter(|p| **p == Phase::Local).count() <= 1);
    }

    #[test]
    fn sqp_first_runs_local_before_coordinates() {
        let cfg = AbcdConfig {
            sqp_first: true,
            ..AbcdConfig::default()
        };
        let r = abcd_solve(&sphere(4), &cfg).unwrap();
        assert_eq!(r.trace[0].phase, Phase::Start);
        assert_eq!(r.trace[1].phase, Phase::Local);
        assert_eq!(r.termination, Termination::TargetReached);
    }

    #[test]
    fn same_seed_same_run() {
        let p = Problem::new(
            |x: &[f64]| x.iter().map(|v| v * v - (3.0 * v).cos()).sum::<f64>(),
            Bounds::uniform(5, -3.0, 4.0).unwrap(),
        );
        let cfg = AbcdConfig {
            seed: 11,
            max_evals: Some(5000),
            ..AbcdConfig::default()
        };
        let a = abcd_solve(&p, &cfg).unwrap();
        let b = abcd_solve(&p, &cfg).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.best_x, b.best_x);
    }
}
