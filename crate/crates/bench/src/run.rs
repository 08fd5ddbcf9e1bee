use abcd_core::testbed::get_function;
use abcd_core::{abcd_solve, direct_solve, local_solve, RunReport, Termination};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::spec::{Algorithm, RunSpec};

/// One repetition as written to the JSON-lines report. The trace is
/// exported separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub function: String,
    pub dim: usize,
    pub algorithm: Algorithm,
    pub repetition: usize,
    pub seed: u64,
    pub f_star: f64,
    pub best_f: f64,
    pub best_x: Vec<f64>,
    pub evals: u64,
    pub iterations: usize,
    pub elapsed_seconds: f64,
    pub termination: Termination,
}

impl RunRecord {
    pub fn new(spec: &RunSpec, f_star: f64, rep: usize, report: &RunReport) -> Self {
        Self {
            function: spec.function.clone(),
            dim: spec.dim,
            algorithm: spec.algorithm,
            repetition: rep,
            seed: spec.seed.wrapping_add(rep as u64),
            f_star,
            best_f: report.best_f,
            best_x: report.best_x.clone(),
            evals: report.evals,
            iterations: report.iterations,
            elapsed_seconds: report.elapsed_seconds,
            termination: report.termination,
        }
    }

    pub fn success(&self) -> bool {
        self.termination == Termination::TargetReached
    }
}

/// Runs every repetition of `spec`.
pub fn run_one(spec: &RunSpec) -> Result<Vec<RunReport>> {
    run_one_with(spec, |_, _| {})
}

/// [`run_one`] that hands each report to `done` as soon as it completes,
/// together with its record.
pub fn run_one_with(spec: &RunSpec, mut done: impl FnMut(&RunRecord, &RunReport)) -> Result<Vec<RunReport>> {
    spec.validate()?;
    let (problem, meta) = get_function(&spec.function, spec.dim)?;
    let mut reports = Vec::with_capacity(spec.repetitions);
    for rep in 0..spec.repetitions {
        let report = match spec.algorithm {
            Algorithm::Direct => direct_solve(&problem, &spec.direct_config())?,
            Algorithm::AbcdCoordinateOnly | Algorithm::AbcdFull => abcd_solve(&problem, &spec.abcd_config(rep))?,
            Algorithm::SqpOnly => local_solve(&problem, &spec.abcd_config(rep))?,
        };
        done(&RunRecord::new(spec, meta.f_star, rep, &report), &report);
        reports.push(report);
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_evaluation_budget() {
        for algorithm in [Algorithm::Direct, Algorithm::AbcdCoordinateOnly, Algorithm::AbcdFull, Algorithm::SqpOnly] {
            let mut spec = RunSpec::new("Rastrigin", 6, algorithm);
            spec.max_evals = 1;
            spec.repetitions = 2;
            let reports = run_one(&spec).unwrap();
            assert_eq!(reports.len(), 2);
            for r in reports {
                assert_eq!(r.evals, 1, "{algorithm}");
                assert_eq!(r.termination, Termination::EvalBudget, "{algorithm}");
            }
        }
    }

    #[test]
    fn repetitions_use_consecutive_seeds() {
        let mut spec = RunSpec::new("Levy", 6, Algorithm::AbcdFull);
        spec.repetitions = 2;
        spec.seed = 40;
        let mut seeds = Vec::new();
        run_one_with(&spec, |rec, _| seeds.push(rec.seed)).unwrap();
        assert_eq!(seeds, vec![40, 41]);
    }

    #[test]
    fn config_errors_come_first() {
        let spec = RunSpec::new("Sphere", 0, Algorithm::Direct);
        let mut called = false;
        assert!(run_one_with(&spec, |_, _| called = true).is_err());
        assert!(!called);
    }
}
