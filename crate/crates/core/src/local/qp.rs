//! Approximate minimization of `g·p + ½pᵀBp` over a shifted box.

use nalgebra::{DMatrix, DVector};

use crate::problem::Bounds;

const PG_SWEEPS: usize = 25;

/// Value of the quadratic model at `p`.
pub fn qp_value(g: &[f64], b: &DMatrix<f64>, p: &[f64]) -> f64 {
    let pv = DVector::from_column_slice(p);
    let gv = DVector::from_column_slice(g);
    gv.dot(&pv) + 0.5 * pv.dot(&(b * &pv))
}

fn step_box(x: &[f64], bounds: &Bounds) -> (Vec<f64>, Vec<f64>) {
    let lo = (0..x.len()).map(|i| (bounds.lower()[i] - x[i]).min(0.0)).collect();
    let hi = (0..x.len()).map(|i| (bounds.upper()[i] - x[i]).max(0.0)).collect();
    (lo, hi)
}

fn project(p: &mut [f64], lo: &[f64], hi: &[f64]) {
    for i in 0..p.len() {
        p[i] = p[i].clamp(lo[i], hi[i]);
    }
}

/// First local minimizer of the model along the projected path `P(-t g)`.
pub fn projected_cauchy_point(g: &[f64], b: &DMatrix<f64>, x: &[f64], bounds: &Bounds) -> Vec<f64> {
    let (lo, hi) = step_box(x, bounds);
    cauchy(g, b, &lo, &hi)
}

fn cauchy(g: &[f64], b: &DMatrix<f64>, lo: &[f64], hi: &[f64]) -> Vec<f64> {
    let n = g.len();
    // Time at which coordinate i hits its bound when moving along -g.
    let hit: Vec<f64> = (0..n)
        .map(|i| {
            if g[i] < 0.0 {
                hi[i] / -g[i]
            } else if g[i] > 0.0 {
                lo[i] / -g[i]
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &c| hit[a].total_cmp(&hit[c]));

    let gv = DVector::from_column_slice(g);
    let mut p = DVector::<f64>::zeros(n);
    let mut free: Vec<bool> = (0..n).map(|i| hit[i] > 0.0).collect();
    let mut t = 0.0;
    let mut k = 0;
    while k <= n {
        let d = DVector::from_iterator(n, (0..n).map(|i| if free[i] { -g[i] } else { 0.0 }));
        if d.iter().all(|&v| v == 0.0) {
            break;
        }
        let next = order
            .iter()
            .skip(k)
            .map(|&i| hit[i])
            .find(|&h| h > t)
            .unwrap_or(f64::INFINITY);
        let slope = (&gv + b * &p).dot(&d);
        if slope >= 0.0 {
            break;
        }
        let curvature = d.dot(&(b * &d));
        let s_star = if curvature > 0.0 { -slope / curvature } else { f64::INFINITY };
        if s_star < next - t {
            p += d * s_star;
            break;
        }
        if !next.is_finite() {
            // Unbounded descent cannot happen for positive definite B on a
            // bounded box; stop rather than step to infinity.
            break;
        }
        p += d * (next - t);
        t = next;
        while k < n && hit[order[k]] <= t {
            free[order[k]] = false;
            k += 1;
        }
    }
    let mut out: Vec<f64> = p.iter().copied().collect();
    project(&mut out, lo, hi);
    out
}

/// Step `p` with `lower <= x + p <= upper` that approximately minimizes the
/// model `g·p + ½pᵀBp`.
///
/// Starts from the projected Cauchy point, improves it with Newton steps on
/// the free variables (projected and halved until they decrease the model),
/// then applies a fixed number of projected-gradient sweeps. Every change is
/// accepted only if it lowers the model, so the result is never worse than
/// the Cauchy point and its model value is at most zero.
pub fn box_qp_step(g: &[f64], b: &DMatrix<f64>, x: &[f64], bounds: &Bounds) -> Vec<f64> {
    let n = g.len();
    let (lo, hi) = step_box(x, bounds);
    let mut p = cauchy(g, b, &lo, &hi);
    let mut q = qp_value(g, b, &p);
    if !(q <= 0.0) {
        p = vec![0.0; n];
        q = 0.0;
    }

    for _ in 0..n + 2 {
        let free: Vec<usize> = (0..n).filter(|&i| p[i] > lo[i] && p[i] < hi[i]).collect();
        if free.is_empty() {
            break;
        }
        let Some(candidate) = newton_on_free(g, b, &p, &free) else {
            break;
        };
        let mut improved = false;
        let mut alpha = 1.0;
        for _ in 0..30 {
            let mut trial: Vec<f64> = (0..n).map(|i| p[i] + alpha * (candidate[i] - p[i])).collect();
            project(&mut trial, &lo, &hi);
            let qt = qp_value(g, b, &trial);
            if qt < q {
                p = trial;
                q = qt;
                improved = true;
                break;
            }
            alpha *= 0.5;
        }
        if !improved {
            break;
        }
    }

    // Projected gradient with step 1/L, L bounding the largest eigenvalue.
    let lipschitz = b.norm().max(f64::MIN_POSITIVE);
    let gv = DVector::from_column_slice(g);
    for _ in 0..PG_SWEEPS {
        let pv = DVector::from_column_slice(&p);
        let grad = &gv + b * &pv;
        let mut trial: Vec<f64> = (0..n).map(|i| p[i] - grad[i] / lipschitz).collect();
        project(&mut trial, &lo, &hi);
        let qt = qp_value(g, b, &trial);
        if qt < q {
            p = trial;
            q = qt;
        } else {
            break;
        }
    }
    p
}

/// Minimizer of the model over the free coordinates with the rest held at `p`.
fn newton_on_free(g: &[f64], b: &DMatrix<f64>, p: &[f64], free: &[usize]) -> Option<Vec<f64>> {
    let n = g.len();
    let m = free.len();
    let is_free: Vec<bool> = {
        let mut v = vec![false; n];
        for &i in free {
            v[i] = true;
        }
        v
    };
    let bff = DMatrix::from_fn(m, m, |r, c| b[(free[r], free[c])]);
    let rhs = DVector::from_iterator(
        m,
        free.iter().map(|&i| {
            let fixed: f64 = (0..n).filter(|&j| !is_free[j]).map(|j| b[(i, j)] * p[j]).sum();
            -(g[i] + fixed)
        }),
    );
    let sol = bff.cholesky()?.solve(&rhs);
    let mut out = p.to_vec();
    for (k, &i) in free.iter().enumerate() {
        out[i] = sol[k];
    }
    out.iter().all(|v| v.is_finite()).then_some(out)
}
