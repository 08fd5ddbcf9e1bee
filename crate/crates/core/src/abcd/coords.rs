//! Building blocks of the block coordinate search: coordinate selection,
//! subproblem projection, stall tracking and the starting point.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, EvalError, Result};
use crate::problem::{evaluate_counted, Bounds, EvalCounter, Problem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectMode {
    /// Consecutive coordinates, wrapping around.
    Sequential,
    /// A uniformly random subset.
    Random,
}

/// Chooses the coordinate blocks of successive subproblems.
#[derive(Debug, Clone)]
pub struct CoordinateSelector<R> {
    n: usize,
    cursor: usize,
    rng: R,
}

impl<R: Rng> CoordinateSelector<R> {
    pub fn new(n: usize, rng: R) -> Self {
        Self { n, cursor: 0, rng }
    }

    /// Next coordinate the sequential rotation starts from.
    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn set_cursor(&mut self, cursor: usize) {
        self.cursor = cursor % self.n;
    }

    /// Distinct indices in `[0, n)`. Sequential blocks keep rotation order;
    /// random blocks are sorted.
    pub fn select(&mut self, size: usize, mode: SelectMode) -> Result<Vec<usize>> {
        if size == 0 || size > self.n {
            return Err(Error::Config(format!(
                "block size {size} must lie in 1..={}",
                self.n
            )));
        }
        Ok(match mode {
            SelectMode::Sequential => {
                let idx = (0..size).map(|k| (self.cursor + k) % self.n).collect();
                self.cursor = (self.cursor + size) % self.n;
                idx
            }
            SelectMode::Random => {
                let mut idx = sample(&mut self.rng, self.n, size).into_vec();
                idx.sort_unstable();
                idx
            }
        })
    }
}

/// The restriction of `problem` to the coordinates `idx`, with every other
/// coordinate frozen at `incumbent`.
///
/// Evaluating the subproblem calls the original objective, so charging a
/// counter for it charges the run.
pub fn make_subproblem(problem: &Problem, incumbent: &[f64], idx: &[usize]) -> Problem {
    let objective = problem.objective().clone();
    let base = incumbent.to_vec();
    let map = idx.to_vec();
    let bounds: Bounds = problem.bounds().restrict(idx);
    Problem::new(
        move |y: &[f64]| {
            let mut x = base.clone();
            for (k, &i) in map.iter().enumerate() {
                x[i] = y[k];
            }
            objective(&x)
        },
        bounds,
    )
}

/// `incumbent` with the coordinates `idx` replaced by `y`.
pub fn embed(incumbent: &[f64], idx: &[usize], y: &[f64]) -> Vec<f64> {
    let mut x = incumbent.to_vec();
    for (k, &i) in idx.iter().enumerate() {
        x[i] = y[k];
    }
    x
}

/// Updates the run of subproblems whose descent was at most `eps1`.
/// Returns the new streak and whether it reached `t1`.
pub fn stall_update(streak: usize, f_prev: f64, f_new: f64, eps1: f64, t1: usize) -> (usize, bool) {
    let streak = if f_prev - f_new <= eps1 { streak + 1 } else { 0 };
    (streak, streak >= t1)
}

/// Default number of starting samples.
pub fn default_q(n: usize) -> usize {
    (2 * n).min(32)
}

/// Best of `q` random points, one drawn uniformly from each of `q`
/// equal-width slabs along the widest dimension (lowest index on ties).
pub fn choose_start<R: Rng>(
    problem: &Problem,
    q: usize,
    rng: &mut R,
    counter: &mut EvalCounter,
) -> std::result::Result<(Vec<f64>, f64), EvalError> {
    match sample_start(problem, q, rng, counter) {
        (_, Some(e)) => Err(e),
        (best, None) => Ok(best.expect("q >= 1")),
    }
}

/// [`choose_start`] that keeps the best sample obtained before an
/// evaluation failed.
pub fn sample_start<R: Rng>(
    problem: &Problem,
    q: usize,
    rng: &mut R,
    counter: &mut EvalCounter,
) -> (Option<(Vec<f64>, f64)>, Option<EvalError>) {
    let b = problem.bounds();
    let n = b.dim();
    let q = q.max(1);
    let mut split = 0;
    for i in 1..n {
        if b.width(i) > b.width(split) {
            split = i;
        }
    }
    let mut best: Option<(Vec<f64>, f64)> = None;
    for s in 0..q {
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let u: f64 = rng.gen();
                let t = if i == split { (s as f64 + u) / q as f64 } else { u };
                (b.lower()[i] + t * b.width(i)).min(b.upper()[i])
            })
            .collect();
        let f = match evaluate_counted(problem, &x, counter) {
            Ok(f) => f,
            Err(e) => return (best, Some(e)),
        };
        if best.as_ref().map_or(true, |b| f < b.1) {
            best = Some((x, f));
        }
    }
    (best, None)
}
