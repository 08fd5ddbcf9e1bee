//! Box-constrained quasi-Newton local search with finite-difference gradients.
//!
//! Each iteration minimizes the quadratic model `g·p + ½pᵀBp` over the box,
//! then backtracks along that step with an Armijo test. `B` is kept positive
//! definite by Powell-damped BFGS updates.

mod qp;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use qp::{box_qp_step, projected_cauchy_point, qp_value};

use crate::error::{Error, EvalError, Result};
use crate::problem::{evaluate_counted, Bounds, EvalCounter, Problem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocalConfig {
    /// Relative finite-difference step.
    pub grad_step: f64,
    pub max_iters: usize,
    /// Stop when `‖P(x - g) - x‖∞` falls to this value.
    pub pg_tol: f64,
    pub armijo_c: f64,
    pub max_backtracks: usize,
}

impl Default for LocalConfig {
    fn default() -> Self {
        Self {
            grad_step: 1e-7,
            max_iters: 200,
            pg_tol: 1e-8,
            armijo_c: 1e-4,
            max_backtracks: 30,
        }
    }
}

impl LocalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.grad_step > 0.0 && self.grad_step.is_finite()) {
            return Err(Error::Config(format!("grad_step must be positive, got {}", self.grad_step)));
        }
        if !(self.pg_tol > 0.0) {
            return Err(Error::Config(format!("pg_tol must be positive, got {}", self.pg_tol)));
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return Err(Error::Config(format!("armijo_c must lie in (0, 1), got {}", self.armijo_c)));
        }
        if self.max_iters == 0 || self.max_backtracks == 0 {
            return Err(Error::Config("max_iters and max_backtracks must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalStatus {
    /// Projected gradient below tolerance, or no feasible decrease is left
    /// at the resolution of the finite-difference model.
    Stationary,
    IterCap,
    BudgetExhausted,
    /// The search stopped because the objective was non-finite near the iterate.
    LineSearchFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub status: LocalStatus,
}

enum Probe {
    Value(f64),
    NonFinite,
}

fn probe(problem: &Problem, x: &[f64], counter: &mut EvalCounter) -> std::result::Result<Probe, EvalError> {
    match evaluate_counted(problem, x, counter) {
        Ok(v) => Ok(Probe::Value(v)),
        Err(EvalError::NonFinite { .. }) => Ok(Probe::NonFinite),
        Err(e) => Err(e),
    }
}

/// Forward-difference gradient at `x`, given `fx = f(x)`.
///
/// The step for coordinate `i` is `grad_step * max(1, |x_i|)`; it flips to a
/// backward difference when the forward point would leave the box. Spends
/// exactly `n` counted evaluations.
pub fn fd_gradient(
    problem: &Problem,
    x: &[f64],
    fx: f64,
    grad_step: f64,
    counter: &mut EvalCounter,
) -> std::result::Result<Vec<f64>, EvalError> {
    fd_gradient_seen(problem, x, fx, grad_step, counter, &mut |_, _| {})
}

fn fd_gradient_seen(
    problem: &Problem,
    x: &[f64],
    fx: f64,
    grad_step: f64,
    counter: &mut EvalCounter,
    seen: &mut impl FnMut(&[f64], f64),
) -> std::result::Result<Vec<f64>, EvalError> {
    let bounds = problem.bounds();
    let mut probe_x = x.to_vec();
    let mut g = vec![0.0; x.len()];
    for i in 0..x.len() {
        let h = grad_step * x[i].abs().max(1.0);
        let forward = x[i] + h;
        probe_x[i] = if forward <= bounds.upper()[i] { forward } else { x[i] - h };
        let step = probe_x[i] - x[i];
        let fi = evaluate_counted(problem, &probe_x, counter)?;
        seen(&probe_x, fi);
        g[i] = (fi - fx) / step;
        probe_x[i] = x[i];
    }
    Ok(g)
}

/// `‖P(x - g) - x‖∞` for the box `bounds`.
pub fn projected_gradient_norm(x: &[f64], g: &[f64], bounds: &Bounds) -> f64 {
    (0..x.len())
        .map(|i| ((x[i] - g[i]).clamp(bounds.lower()[i], bounds.upper()[i]) - x[i]).abs())
        .fold(0.0, f64::max)
}

/// Runs the local search from `x0`, charging every evaluation to `counter`.
///
/// The returned point is never worse than `x0`.
pub fn sqp_local(problem: &Problem, x0: &[f64], config: &LocalConfig, counter: &mut EvalCounter) -> Result<LocalResult> {
    sqp_from(problem, x0, None, config, counter)
}

/// [`sqp_local`] for callers that already know `f(x0)`.
pub(crate) fn sqp_from(
    problem: &Problem,
    x0: &[f64],
    f0: Option<f64>,
    config: &LocalConfig,
    counter: &mut EvalCounter,
) -> Result<LocalResult> {
    config.validate()?;
    let bounds = problem.bounds();
    if x0.len() != problem.dim() {
        return Err(Error::Config(format!("start point has {} components, problem has {}", x0.len(), problem.dim())));
    }
    let mut x = x0.to_vec();
    bounds.clamp(&mut x);
    let n = x.len();

    let mut f = match f0 {
        Some(v) => v,
        None => match evaluate_counted(problem, &x, counter) {
            Ok(v) => v,
            Err(EvalError::Halted(_)) => {
                return Ok(LocalResult {
                    x,
                    f: f64::INFINITY,
                    iterations: 0,
                    status: LocalStatus::BudgetExhausted,
                })
            }
            Err(e) => return Err(e.into()),
        },
    };
    // Best point evaluated so far, including gradient probes.
    let mut best = (x.clone(), f);
    let mut seen = |p: &[f64], v: f64| {
        if v < best.1 {
            best = (p.to_vec(), v);
        }
    };

    let mut iterations = 0;
    let status = 'search: {
        let mut g = match fd_gradient_seen(problem, &x, f, config.grad_step, counter, &mut seen) {
            Ok(g) => g,
            Err(EvalError::Halted(_)) => break 'search LocalStatus::BudgetExhausted,
            Err(EvalError::NonFinite { .. }) => break 'search LocalStatus::LineSearchFailure,
        };
        let mut b = DMatrix::<f64>::identity(n, n);
        let mut scaled = false;

        while iterations < config.max_iters {
            if projected_gradient_norm(&x, &g, bounds) <= config.pg_tol {
                break 'search LocalStatus::Stationary;
            }

            let mut accepted = None;
            let mut saw_non_finite = false;
            // Model step first; if it fails, one projected steepest-descent try with B reset.
            for attempt in 0..2 {
                let p: Vec<f64> = if attempt == 0 {
                    box_qp_step(&g, &b, &x, bounds)
                } else {
                    b = DMatrix::identity(n, n);
                    (0..n)
                        .map(|i| (x[i] - g[i]).clamp(bounds.lower()[i], bounds.upper()[i]) - x[i])
                        .collect()
                };
                let slope: f64 = g.iter().zip(&p).map(|(a, c)| a * c).sum();
                if !(slope < 0.0) {
                    continue;
                }
                let mut alpha = 1.0;
                for _ in 0..config.max_backtracks {
                    let mut trial: Vec<f64> = (0..n).map(|i| x[i] + alpha * p[i]).collect();
                    bounds.clamp(&mut trial);
                    match probe(problem, &trial, counter) {
                        Ok(Probe::Value(ft)) => {
                            seen(&trial, ft);
                            if ft <= f + config.armijo_c * alpha * slope && ft < f {
                                accepted = Some((trial, ft));
                                break;
                            }
                        }
                        Ok(Probe::NonFinite) => saw_non_finite = true,
                        Err(_) => break 'search LocalStatus::BudgetExhausted,
                    }
                    alpha *= 0.5;
                }
                if accepted.is_some() {
                    break;
                }
            }

            let Some((x_new, f_new)) = accepted else {
                break 'search if saw_non_finite {
                    LocalStatus::LineSearchFailure
                } else {
                    LocalStatus::Stationary
                };
            };
            iterations += 1;

            let g_new = match fd_gradient_seen(problem, &x_new, f_new, config.grad_step, counter, &mut seen) {
                Ok(g) => g,
                Err(EvalError::Halted(_)) => break 'search LocalStatus::BudgetExhausted,
                Err(EvalError::NonFinite { .. }) => break 'search LocalStatus::LineSearchFailure,
            };
            let s = DVector::from_iterator(n, (0..n).map(|i| x_new[i] - x[i]));
            let y = DVector::from_iterator(n, (0..n).map(|i| g_new[i] - g[i]));
            if !scaled {
                let sy = s.dot(&y);
                if sy > 0.0 {
                    b = DMatrix::identity(n, n) * (y.dot(&y) / sy);
                    scaled = true;
                }
            }
            damped_bfgs_update(&mut b, &s, &y);

            x = x_new;
            f = f_new;
            g = g_new;
        }
        LocalStatus::IterCap
    };
    let (x, f) = best;
    Ok(LocalResult {
        x,
        f,
        iterations,
        status,
    })
}

/// BFGS update of `b` with Powell's damping, which keeps `b` positive definite.
fn damped_bfgs_update(b: &mut DMatrix<f64>, s: &DVector<f64>, y: &DVector<f64>) {
    let bs = &*b * s;
    let sbs = s.dot(&bs);
    if !(sbs > f64::MIN_POSITIVE) {
        return;
    }
    let sy = s.dot(y);
    let r = if sy >= 0.2 * sbs {
        y.clone()
    } else {
        let theta = 0.8 * sbs / (sbs - sy);
        y * theta + &bs * (1.0 - theta)
    };
    let sr = s.dot(&r);
    if !(sr > 0.0) {
        return;
    }
    let updated = &*b - (&bs * bs.transpose()) / sbs + (&r * r.transpose()) / sr;
    if updated.iter().all(|v| v.is_finite()) {
        *b = updated;
    }
}
