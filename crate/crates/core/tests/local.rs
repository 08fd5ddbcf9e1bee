use abcd_core::local::{box_qp_step, fd_gradient, qp_value};
use abcd_core::testbed::get_function;
use abcd_core::{sqp_local, Bounds, EvalCounter, LocalConfig, LocalStatus, Problem};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// First local minimizer of the quadratic model along the projected
/// steepest-descent path, found by walking the breakpoints.
fn cauchy_oracle(g: &[f64], b: &DMatrix<f64>, x: &[f64], lo: &[f64], hi: &[f64]) -> Vec<f64> {
    let n = g.len();
    let tbar: Vec<f64> = (0..n)
        .map(|i| {
            if g[i] < 0.0 {
                (x[i] - hi[i]) / g[i]
            } else if g[i] > 0.0 {
                (x[i] - lo[i]) / g[i]
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let mut breaks: Vec<f64> = tbar.iter().copied().filter(|t| *t > 0.0).collect();
    breaks.push(f64::INFINITY);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let mut p = DVector::zeros(n);
    let gv = DVector::from_column_slice(g);
    let mut t_prev = 0.0;
    for &t in &breaks {
        let d = DVector::from_iterator(n, (0..n).map(|i| if tbar[i] > t_prev { -g[i] } else { 0.0 }));
        let slope = gv.dot(&d) + p.dot(&(b * &d));
        let curv = d.dot(&(b * &d));
        if slope >= 0.0 {
            break;
        }
        let dt = if curv > 0.0 { -slope / curv } else { f64::INFINITY };
        if dt < t - t_prev {
            p += d * dt;
            return p.iter().copied().collect();
        }
        if t.is_infinite() {
            break;
        }
        p += d * (t - t_prev);
        t_prev = t;
    }
    p.iter().copied().collect()
}

fn spd(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    &m * m.transpose() + DMatrix::identity(n, n) * 0.1
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]
    #[test]
    fn qp_step_beats_cauchy_point(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 5;
        let b = spd(&mut rng, n);
        let g: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let bounds = Bounds::uniform(n, -1.0, 1.0).unwrap();
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let p = box_qp_step(&g, &b, &x, &bounds);
        for i in 0..n {
            prop_assert!(x[i] + p[i] >= -1.0 && x[i] + p[i] <= 1.0);
        }
        let lo: Vec<f64> = vec![-1.0; n];
        let hi: Vec<f64> = vec![1.0; n];
        let c = cauchy_oracle(&g, &b, &x, &lo, &hi);
        let (vp, vc) = (qp_value(&g, &b, &p), qp_value(&g, &b, &c));
        prop_assert!(vp <= vc + 1e-12 * (1.0 + vc.abs()), "step {} cauchy {}", vp, vc);
        prop_assert!(vp <= 0.0);
    }
}

fn analytic(name: &str, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    match name {
        "Sphere" => x.iter().map(|v| 2.0 * v).collect(),
        "Sum Square" => x.iter().enumerate().map(|(i, v)| 2.0 * (i + 1) as f64 * v).collect(),
        "Rosenbrock" => (0..n)
            .map(|i| {
                let mut g = 0.0;
                if i + 1 < n {
                    g += -400.0 * x[i] * (x[i + 1] - x[i] * x[i]) + 2.0 * (x[i] - 1.0);
                }
                if i > 0 {
                    g += 200.0 * (x[i] - x[i - 1] * x[i - 1]);
                }
                g
            })
            .collect(),
        "Trid" => (0..n)
            .map(|i| {
                let left = if i > 0 { x[i - 1] } else { 0.0 };
                let right = if i + 1 < n { x[i + 1] } else { 0.0 };
                2.0 * (x[i] - 1.0) - left - right
            })
            .collect(),
        "Zakharov" => {
            let s: f64 = x.iter().enumerate().map(|(i, v)| 0.5 * (i + 1) as f64 * v).sum();
            (0..n)
                .map(|i| 2.0 * x[i] + (2.0 * s + 4.0 * s.powi(3)) * 0.5 * (i + 1) as f64)
                .collect()
        }
        _ => unreachable!(),
    }
}

#[test]
fn finite_differences_match_analytic_gradients() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for name in ["Sphere", "Sum Square", "Rosenbrock", "Trid", "Zakharov"] {
        let (p, meta) = get_function(name, 6).unwrap();
        let b = &meta.bounds;
        for _ in 0..20 {
            // Stay off the box faces so forward differences are used.
            let x: Vec<f64> = (0..6)
                .map(|i| b.lower()[i] + b.width(i) * rng.gen_range(0.05..0.95))
                .collect();
            let fx = p.eval_uncounted(&x);
            let mut c = EvalCounter::new();
            let g = fd_gradient(&p, &x, fx, 1e-7, &mut c).unwrap();
            assert_eq!(c.count(), 6);
            let exact = analytic(name, &x);
            let err: f64 = g.iter().zip(&exact).map(|(a, e)| (a - e).powi(2)).sum::<f64>().sqrt();
            let norm: f64 = exact.iter().map(|e| e * e).sum::<f64>().sqrt();
            assert!(err <= 1e-4 * norm.max(1.0), "{name} at {x:?}: {err} vs {norm}");
        }
    }
}

#[test]
fn quadratics_are_solved_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for n in 1..=6 {
        for _ in 0..5 {
            let a = spd(&mut rng, n);
            let x_star = DVector::from_fn(n, |_, _| rng.gen_range(-2.0..2.0));
            let bv = -(&a * &x_star);
            let f_star = 0.5 * x_star.dot(&(&a * &x_star)) + bv.dot(&x_star);
            let (a2, b2) = (a.clone(), bv.clone());
            let p = Problem::new(
                move |x: &[f64]| {
                    let x = DVector::from_column_slice(x);
                    0.5 * x.dot(&(&a2 * &x)) + b2.dot(&x)
                },
                Bounds::uniform(n, -10.0, 10.0).unwrap(),
            );
            let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(-8.0..8.0)).collect();
            let r = sqp_local(&p, &x0, &LocalConfig::default(), &mut EvalCounter::new()).unwrap();
            assert!(r.f - f_star <= 1e-8, "n={n}: {} vs {f_star}", r.f);
            assert!(r.iterations <= n + 30, "n={n}: {} iterations", r.iterations);
        }
    }
}

#[test]
fn sphere_from_random_point() {
    let (p, meta) = get_function("Sphere", 6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let b = &meta.bounds;
    let x0: Vec<f64> = (0..6).map(|i| rng.gen_range(b.lower()[i]..b.upper()[i])).collect();
    let r = sqp_local(&p, &x0, &LocalConfig::default(), &mut EvalCounter::new()).unwrap();
    assert!(r.f <= 1e-8);
    assert!(r.iterations <= 50);
}

#[test]
fn rosenbrock_from_coordinate_phase_endpoint() {
    let (p, _) = get_function("Rosenbrock", 2).unwrap();
    let cfg = LocalConfig {
        max_iters: 500,
        ..LocalConfig::default()
    };
    let r = sqp_local(&p, &[-0.5, 0.8], &cfg, &mut EvalCounter::new()).unwrap();
    assert!(r.f <= 1e-4, "{r:?}");
}

#[test]
fn ackley_far_start_is_trapped() {
    let (p, _) = get_function("Ackley", 6).unwrap();
    let x0 = [10.3, 11.0, 12.7, 10.0, 14.2, 19.5];
    let r = sqp_local(&p, &x0, &LocalConfig::default(), &mut EvalCounter::new()).unwrap();
    assert_eq!(r.status, LocalStatus::Stationary, "{r:?}");
    assert!(r.f > 1e-4);
    assert!(r.f <= p.eval_uncounted(&x0));
}

#[test]
fn result_is_feasible_and_never_worse() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for name in ["Rastrigin", "Levy", "Dixon-Price", "Powell", "Schwefel"] {
        let (p, meta) = get_function(name, 4).unwrap();
        let b = &meta.bounds;
        for _ in 0..5 {
            let x0: Vec<f64> = (0..4).map(|i| rng.gen_range(b.lower()[i]..=b.upper()[i])).collect();
            let r = sqp_local(&p, &x0, &LocalConfig::default(), &mut EvalCounter::new()).unwrap();
            assert!(b.contains(&r.x));
            assert!(r.f <= p.eval_uncounted(&x0));
            assert_eq!(r.f, p.eval_uncounted(&r.x));
        }
    }
}
