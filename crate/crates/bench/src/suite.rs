use std::collections::BTreeMap;
use std::fmt::Write as _;

use abcd_core::testbed::describe;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};
use crate::run::{run_one, RunRecord};
use crate::spec::{Algorithm, RunSpec};

/// Aggregate of one spec's repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteRow {
    pub function: String,
    pub dim: usize,
    pub algorithm: Algorithm,
    pub runs: usize,
    pub successes: usize,
    /// Median evaluations to the target, counting failed repetitions as
    /// infinite; `None` when the median is infinite.
    pub median_evals: Option<f64>,
    pub best_f: Option<f64>,
    /// Errors of repetitions that did not produce a report.
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub rows: Vec<SuiteRow>,
    /// Every completed repetition, in spec order.
    pub records: Vec<RunRecord>,
    pub success_counts: BTreeMap<Algorithm, usize>,
    /// Fraction of (function, dim) problems on which an algorithm reaches the
    /// target with the fewest median evaluations; ties credit every winner.
    pub winning_ratio: BTreeMap<Algorithm, f64>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Runs every repetition of every spec on a pool of `parallelism` threads and
/// aggregates the results. A failing repetition is recorded on its row.
pub fn run_suite(specs: &[RunSpec], parallelism: usize) -> Result<SuiteReport> {
    if specs.is_empty() {
        return Err(BenchError::Config("suite has no specs".into()));
    }
    let jobs: Vec<(usize, usize)> = specs
        .iter()
        .enumerate()
        .flat_map(|(i, s)| (0..s.repetitions.max(1)).map(move |r| (i, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| BenchError::Config(format!("thread pool: {e}")))?;

    let results: Vec<(usize, std::result::Result<RunRecord, String>)> = pool.install(|| {
        jobs.par_iter()
            .map(|&(i, rep)| {
                let spec = &specs[i];
                let single = RunSpec {
                    seed: spec.seed.wrapping_add(rep as u64),
                    repetitions: 1,
                    ..spec.clone()
                };
                let outcome = run_one(&single).and_then(|mut reports| {
                    let f_star = describe(&spec.function, spec.dim)?.f_star;
                    Ok(RunRecord::new(spec, f_star, rep, &reports.remove(0)))
                });
                (i, outcome.map_err(|e| e.to_string()))
            })
            .collect()
    });

    let mut rows: Vec<SuiteRow> = specs
        .iter()
        .map(|s| SuiteRow {
            function: s.function.clone(),
            dim: s.dim,
            algorithm: s.algorithm,
            runs: 0,
            successes: 0,
            median_evals: None,
            best_f: None,
            errors: Vec::new(),
        })
        .collect();
    let mut evals: Vec<Vec<f64>> = vec![Vec::new(); specs.len()];
    let mut records = Vec::new();
    for (i, res) in results {
        let row = &mut rows[i];
        row.runs += 1;
        match res {
            Ok(rec) => {
                row.best_f = Some(row.best_f.map_or(rec.best_f, |b: f64| b.min(rec.best_f)));
                if rec.success() {
                    row.successes += 1;
                    evals[i].push(rec.evals as f64);
                } else {
                    evals[i].push(f64::INFINITY);
                }
                records.push(rec);
            }
            Err(e) => {
                row.errors.push(e);
                evals[i].push(f64::INFINITY);
            }
        }
    }
    for (row, e) in rows.iter_mut().zip(evals) {
        let m = median(e);
        row.median_evals = m.is_finite().then_some(m);
    }

    let mut success_counts: BTreeMap<Algorithm, usize> = specs.iter().map(|s| (s.algorithm, 0)).collect();
    for r in &records {
        if r.success() {
            *success_counts.entry(r.algorithm).or_default() += 1;
        }
    }

    let mut problems: Vec<(String, usize)> = Vec::new();
    for s in specs {
        let key = (s.function.clone(), s.dim);
        if !problems.contains(&key) {
            problems.push(key);
        }
    }
    let mut wins: BTreeMap<Algorithm, usize> = specs.iter().map(|s| (s.algorithm, 0)).collect();
    for (f, n) in &problems {
        let entrants: Vec<(Algorithm, f64)> = rows
            .iter()
            .filter(|r| &r.function == f && r.dim == *n)
            .filter_map(|r| r.median_evals.map(|m| (r.algorithm, m)))
            .collect();
        if let Some(best) = entrants.iter().map(|e| e.1).min_by(f64::total_cmp) {
            for (a, m) in &entrants {
                if *m == best {
                    *wins.entry(*a).or_default() += 1;
                }
            }
        }
    }
    let winning_ratio = wins
        .into_iter()
        .map(|(a, w)| (a, w as f64 / problems.len() as f64))
        .collect();

    Ok(SuiteReport {
        rows,
        records,
        success_counts,
        winning_ratio,
    })
}

impl SuiteReport {
    /// Plain-text summary table.
    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<14} {:>3}  {:<22} {:>7}  {:>12}  {:>14}",
            "function", "n", "algorithm", "success", "median evals", "best f"
        );
        for r in &self.rows {
            let med = r.median_evals.map_or("fail".to_string(), |m| format!("{m:.0}"));
            let best = r.best_f.map_or("error".to_string(), |b| format!("{b:.6e}"));
            let _ = writeln!(
                s,
                "{:<14} {:>3}  {:<22} {:>3}/{:<3}  {:>12}  {:>14}",
                r.function, r.dim, r.algorithm, r.successes, r.runs, med, best
            );
        }
        for (a, ratio) in &self.winning_ratio {
            let _ = writeln!(
                s,
                "{a}: {} successful runs, winning ratio {ratio:.3}",
                self.success_counts.get(a).copied().unwrap_or(0)
            );
        }
        s
    }
}
