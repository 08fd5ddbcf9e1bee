//! Box-constrained problems, evaluation accounting and the affine map between
//! user coordinates and the unit hypercube.

use std::fmt;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, EvalError, Halt, Result};

/// Objective callable shared between a problem and the subproblems derived from it.
pub type Objective = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Axis-aligned box `lower <= x <= upper` with strictly positive widths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidBounds("dimension must be at least 1".into()));
        }
        if lower.len() != upper.len() {
            return Err(Error::InvalidBounds(format!(
                "lower has {} entries but upper has {}",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (&l, &u)) in lower.iter().zip(&upper).enumerate() {
            if !l.is_finite() || !u.is_finite() {
                return Err(Error::InvalidBounds(format!(
                    "dimension {i} has a non-finite bound [{l}, {u}]"
                )));
            }
            if l >= u {
                return Err(Error::InvalidBounds(format!(
                    "dimension {i} has lower {l} >= upper {u}"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The cube `[lo, hi]^n`.
    pub fn uniform(n: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; n], vec![hi; n])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&l, &u))| l <= v && v <= u)
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&l, &u)| 0.5 * (l + u))
            .collect()
    }

    /// Componentwise projection onto the box.
    pub fn clamp(&self, x: &mut [f64]) {
        for ((v, &l), &u) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.clamp(l, u);
        }
    }

    /// Bounds of the coordinates listed in `idx`, in that order.
    pub fn restrict(&self, idx: &[usize]) -> Bounds {
        Bounds {
            lower: idx.iter().map(|&i| self.lower[i]).collect(),
            upper: idx.iter().map(|&i| self.upper[i]).collect(),
        }
    }

    /// Maps a user-space point to unit-cube coordinates.
    pub fn normalize_point(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(i, &v)| (v - self.lower[i]) / self.width(i))
            .collect()
    }

    /// Maps a unit-cube point back to user space.
    pub fn denormalize(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.dim() {
            return Err(Error::Config(format!(
                "point has {} components, bounds have {}",
                z.len(),
                self.dim()
            )));
        }
        if let Some((index, &value)) = z
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::OutsideUnitCube { index, value });
        }
        let mut x = vec![0.0; z.len()];
        self.denormalize_into(z, &mut x);
        Ok(x)
    }

    pub(crate) fn denormalize_into(&self, z: &[f64], out: &mut [f64]) {
        for (i, (o, &zi)) in out.iter_mut().zip(z).enumerate() {
            let v = self.lower[i] + zi * self.width(i);
            *o = v.clamp(self.lower[i], self.upper[i]);
        }
    }
}

/// A bound-constrained minimization problem.
#[derive(Clone)]
pub struct Problem {
    objective: Objective,
    bounds: Bounds,
    known_optimum: Option<f64>,
}

impl Problem {
    pub fn new(objective: impl Fn(&[f64]) -> f64 + Send + Sync + 'static, bounds: Bounds) -> Self {
        Self::from_arc(Arc::new(objective), bounds)
    }

    pub fn from_arc(objective: Objective, bounds: Bounds) -> Self {
        Self {
            objective,
            bounds,
            known_optimum: None,
        }
    }

    /// Attaches the known global minimum value `f*`.
    pub fn with_known_optimum(mut self, f_star: f64) -> Self {
        self.known_optimum = Some(f_star);
        self
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn known_optimum(&self) -> Option<f64> {
        self.known_optimum
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    /// Evaluates without counting. Solvers must go through [`evaluate_counted`].
    pub fn eval_uncounted(&self, x: &[f64]) -> f64 {
        (self.objective)(x)
    }
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("bounds", &self.bounds)
            .field("known_optimum", &self.known_optimum)
            .finish_non_exhaustive()
    }
}

/// A problem viewed over `[0, 1]^n`.
#[derive(Debug, Clone)]
pub struct NormalizedProblem {
    original: Problem,
}

pub fn normalize(problem: &Problem) -> Result<NormalizedProblem> {
    // Bounds are validated on construction; re-check so hand-built values fail loudly.
    Bounds::new(problem.bounds.lower.clone(), problem.bounds.upper.clone())?;
    Ok(NormalizedProblem {
        original: problem.clone(),
    })
}

pub fn denormalize(z: &[f64], bounds: &Bounds) -> Result<Vec<f64>> {
    bounds.denormalize(z)
}

impl NormalizedProblem {
    pub fn dim(&self) -> usize {
        self.original.dim()
    }

    pub fn original(&self) -> &Problem {
        &self.original
    }

    pub fn to_user(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.original.bounds.denormalize(z)
    }

    pub fn to_unit(&self, x: &[f64]) -> Vec<f64> {
        self.original.bounds.normalize_point(x)
    }

    /// Counted evaluation at a unit-cube point. Also returns the user-space point.
    pub fn evaluate(&self, z: &[f64], counter: &mut EvalCounter) -> std::result::Result<(f64, Vec<f64>), EvalError> {
        let mut x = vec![0.0; z.len()];
        self.original.bounds.denormalize_into(z, &mut x);
        let f = evaluate_counted(&self.original, &x, counter)?;
        Ok((f, x))
    }

    /// The normalized problem as a standalone [`Problem`] over the unit cube.
    pub fn as_problem(&self) -> Problem {
        let inner = self.original.clone();
        let unit = Bounds::uniform(self.dim(), 0.0, 1.0).expect("unit cube is valid");
        let mut p = Problem::new(
            move |z: &[f64]| {
                let mut x = vec![0.0; z.len()];
                inner.bounds.denormalize_into(z, &mut x);
                inner.eval_uncounted(&x)
            },
            unit,
        );
        p.known_optimum = self.original.known_optimum;
        p
    }
}

/// Target accuracy test `|f - value| <= accuracy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub value: f64,
    pub accuracy: f64,
}

impl Target {
    pub fn reached(&self, f: f64) -> bool {
        (f - self.value).abs() <= self.accuracy
    }
}

/// Counts objective evaluations for one run and enforces its budgets.
///
/// Besides the evaluation cap the counter carries an optional wall-clock
/// deadline and an optional target. Once an evaluation reaches the target,
/// every later request is refused with [`Halt::Target`], so nested solvers
/// unwind without spending more evaluations.
#[derive(Debug, Clone, Default)]
pub struct EvalCounter {
    count: u64,
    cap: Option<u64>,
    sub_cap: Option<u64>,
    deadline: Option<Instant>,
    target: Option<Target>,
    target_hit: bool,
}

impl EvalCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_cap(cap: u64) -> Self {
        Self {
            cap: Some(cap),
            ..Self::default()
        }
    }

    pub fn set_cap(&mut self, cap: Option<u64>) -> &mut Self {
        self.cap = cap;
        self
    }

    pub fn set_time_budget(&mut self, budget: Option<Duration>) -> &mut Self {
        self.deadline = budget.map(|d| Instant::now() + d);
        self
    }

    pub fn set_target(&mut self, target: Option<Target>) -> &mut Self {
        self.target = target;
        self
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn cap(&self) -> Option<u64> {
        self.cap
    }

    pub fn target(&self) -> Option<Target> {
        self.target
    }

    pub fn target_hit(&self) -> bool {
        self.target_hit
    }

    /// The reason the next evaluation would be refused, if any.
    pub fn check(&self) -> Option<Halt> {
        if self.target_hit {
            return Some(Halt::Target);
        }
        if self.cap.is_some_and(|c| self.count >= c) {
            return Some(Halt::EvalBudget);
        }
        if self.deadline.is_some_and(|d| Instant::now() >= d) {
            return Some(Halt::TimeBudget);
        }
        if self.sub_cap.is_some_and(|c| self.count >= c) {
            return Some(Halt::SubBudget);
        }
        None
    }

    /// Runs `f` with an extra cap of `limit` further evaluations.
    ///
    /// Exhausting the extra cap surfaces as [`Halt::SubBudget`]; the run-wide
    /// cap keeps precedence.
    pub fn with_sublimit<R>(&mut self, limit: u64, f: impl FnOnce(&mut EvalCounter) -> R) -> R {
        let saved = self.sub_cap;
        let cap = self.count.saturating_add(limit);
        self.sub_cap = Some(saved.map_or(cap, |s| s.min(cap)));
        let out = f(self);
        self.sub_cap = saved;
        out
    }

    fn record(&mut self, value: f64) {
        self.count += 1;
        if self.target.is_some_and(|t| t.reached(value)) {
            self.target_hit = true;
        }
    }
}

/// Evaluates `problem` at `x`, charging one evaluation to `counter`.
///
/// No evaluation happens when the counter refuses. A non-finite objective
/// value is still counted and then rejected.
pub fn evaluate_counted(problem: &Problem, x: &[f64], counter: &mut EvalCounter) -> std::result::Result<f64, EvalError> {
    if let Some(halt) = counter.check() {
        return Err(EvalError::Halted(halt));
    }
    let value = problem.eval_uncounted(x);
    if !value.is_finite() {
        counter.count += 1;
        return Err(EvalError::NonFinite {
            value,
            x: x.to_vec(),
        });
    }
    counter.record(value);
    Ok(value)
}

impl From<EvalError> for Error {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::NonFinite { value, x } => Error::NonFinite { value, x },
            EvalError::Halted(h) => Error::Config(format!("evaluation refused: {h:?}")),
        }
    }
}
