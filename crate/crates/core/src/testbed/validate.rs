//! Self-check of stored optima: value at the stored optimizer, and no random
//! sample (even after local polishing) may beat the stored minimum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{describe, get_function, registry};
use crate::error::{Error, Result};
use crate::local::{sqp_local, LocalConfig};
use crate::problem::EvalCounter;

const TOL: f64 = 1e-9;
const POLISHED: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationEntry {
    pub name: &'static str,
    pub dim: usize,
    pub f_star: f64,
    pub f_at_x_star: Option<f64>,
    pub best_sampled: f64,
    pub best_polished: f64,
}

/// Checks one function at one dimension with `samples` seeded uniform draws.
pub fn validate_function(name: &str, dim: usize, samples: usize, seed: u64) -> Result<ValidationEntry> {
    let (problem, meta) = get_function(name, dim)?;
    let fail = |detail: String| Error::Validation {
        name: meta.name.to_string(),
        dim,
        detail,
    };

    let f_at_x_star = meta.x_star.as_ref().map(|x| problem.eval_uncounted(x));
    if let Some(v) = f_at_x_star {
        if (v - meta.f_star).abs() > TOL {
            return Err(fail(format!("f(x*) = {v} but f* = {}", meta.f_star)));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = &meta.bounds;
    let mut best: Vec<(f64, Vec<f64>)> = Vec::with_capacity(POLISHED + 1);
    let mut x = vec![0.0; dim];
    for _ in 0..samples {
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = rng.gen_range(b.lower()[i]..=b.upper()[i]);
        }
        let f = problem.eval_uncounted(&x);
        if best.len() < POLISHED || f < best[best.len() - 1].0 {
            let at = best.partition_point(|(v, _)| *v <= f);
            best.insert(at, (f, x.clone()));
            best.truncate(POLISHED);
        }
    }
    let best_sampled = best.first().map_or(f64::INFINITY, |b| b.0);

    let mut best_polished = best_sampled;
    for (_, start) in &best {
        let r = sqp_local(&problem, start, &LocalConfig::default(), &mut EvalCounter::new())?;
        best_polished = best_polished.min(r.f);
    }
    if best_polished < meta.f_star - TOL {
        return Err(fail(format!("found {best_polished} below f* = {}", meta.f_star)));
    }
    Ok(ValidationEntry {
        name: meta.name,
        dim,
        f_star: meta.f_star,
        f_at_x_star,
        best_sampled,
        best_polished,
    })
}

/// Runs [`validate_function`] for every registered function at its smallest
/// allowed dimension.
pub fn validate_registry(samples: usize, seed: u64) -> Result<Vec<ValidationEntry>> {
    registry()
        .iter()
        .map(|e| {
            let dim = describe(e.name, e.dims.smallest())?.dim;
            validate_function(e.name, dim, samples, seed)
        })
        .collect()
}
