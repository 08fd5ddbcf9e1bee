use std::sync::{Arc, Mutex};

use abcd_core::abcd::{choose_start, make_subproblem};
use abcd_core::testbed::get_function;
use abcd_core::{abcd_solve, direct_solve, AbcdConfig, Bounds, DirectConfig, EvalCounter, Phase, Problem, Termination};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn recorded(problem: &Problem) -> (Problem, Arc<Mutex<Vec<Vec<f64>>>>) {
    let log = Arc::new(Mutex::new(Vec::new()));
    let sink = Arc::clone(&log);
    let f = problem.objective().clone();
    let mut p = Problem::new(
        move |x: &[f64]| {
            sink.lock().unwrap().push(x.to_vec());
            f(x)
        },
        problem.bounds().clone(),
    );
    if let Some(v) = problem.known_optimum() {
        p = p.with_known_optimum(v);
    }
    (p, log)
}

#[test]
fn full_blocks_degenerate_to_direct() {
    for (name, n) in [("Branin", 2), ("Hartman3", 3), ("Rastrigin", 3)] {
        let (base, _) = get_function(name, n).unwrap();

        let (p, direct_log) = recorded(&base);
        let dcfg = DirectConfig {
            max_evals: Some(2000),
            target_accuracy: None,
            ..DirectConfig::default()
        };
        let d = direct_solve(&p, &dcfg).unwrap();

        let (p, abcd_log) = recorded(&base);
        let acfg = AbcdConfig {
            m1: n,
            switch_enabled: false,
            local_enabled: false,
            target_accuracy: None,
            global_stall_eps: None,
            sub_eval_cap: Some(1_000_000),
            sub_min_measure: None,
            sub_stall: None,
            max_evals: Some(2000),
            ..AbcdConfig::default()
        };
        let a = abcd_solve(&p, &acfg).unwrap();

        let dl = direct_log.lock().unwrap();
        let al = abcd_log.lock().unwrap();
        assert_eq!(dl.len(), 2000, "{name}");
        // Debug builds re-evaluate each adopted subproblem result once,
        // uncounted, after the subproblem ends.
        let checks = usize::from(cfg!(debug_assertions));
        assert_eq!(al.len(), dl.len() + checks, "{name}");
        assert_eq!(dl[..], al[..dl.len()], "{name}");
        assert_eq!(d.best_f, a.best_f);
    }
}

#[test]
fn rosenbrock_row_subproblem() {
    let (p, _) = get_function("Rosenbrock", 2).unwrap();
    let sub = make_subproblem(&p, &[0.0, 0.0], &[0]);
    assert_eq!(sub.bounds(), &p.bounds().restrict(&[0]));
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..100 {
        let y: f64 = rng.gen_range(sub.bounds().lower()[0]..=sub.bounds().upper()[0]);
        let expected = 100.0 * y.powi(4) + (1.0 - y).powi(2);
        assert!((sub.eval_uncounted(&[y]) - expected).abs() <= 1e-12 * expected.max(1.0));
        assert_eq!(sub.eval_uncounted(&[y]), p.eval_uncounted(&[y, 0.0]));
    }
}

#[test]
fn start_replays_seeded_sampler() {
    let (p, meta) = get_function("Rastrigin", 6).unwrap();
    let mut counter = EvalCounter::new();
    let (x, f) = choose_start(&p, 8, &mut ChaCha8Rng::seed_from_u64(42), &mut counter).unwrap();
    assert_eq!(counter.count(), 8);
    assert_eq!(f, p.eval_uncounted(&x));

    // Rastrigin's box is a cube, so slabs run along the first coordinate.
    let b = &meta.bounds;
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut values = Vec::new();
    for s in 0..8 {
        let y: Vec<f64> = (0..6)
            .map(|i| {
                let u: f64 = rng.gen();
                let t = if i == 0 { (s as f64 + u) / 8.0 } else { u };
                b.lower()[i] + t * b.width(i)
            })
            .collect();
        values.push(p.eval_uncounted(&y));
    }
    assert!(values.iter().all(|&v| f <= v));
    assert!(values.iter().any(|&v| (v - f).abs() < 1e-9));
}

#[test]
fn corner_distance_start() {
    let p = Problem::new(
        |x: &[f64]| ((x[0] - 4.0).powi(2) + x[1].powi(2)).sqrt(),
        Bounds::new(vec![0.0, 0.0], vec![4.0, 1.0]).unwrap(),
    );
    let mut counter = EvalCounter::new();
    let (x, f) = choose_start(&p, 4, &mut ChaCha8Rng::seed_from_u64(7), &mut counter).unwrap();
    assert_eq!(counter.count(), 4);
    assert_eq!(f, p.eval_uncounted(&x));
    assert!(x[0] >= 2.0, "a point from the upper slabs should win: {x:?}");
}

#[test]
fn shubert_coordinate_only() {
    let (p, _) = get_function("SHU", 2).unwrap();
    let cfg = AbcdConfig {
        global_stall_eps: None,
        max_evals: Some(100_000),
        ..AbcdConfig::coordinate_only(1)
    };
    let r = abcd_solve(&p, &cfg).unwrap();
    assert_eq!(r.termination, Termination::TargetReached, "{r:?}");
    assert!(r.trace.iter().all(|row| matches!(row.phase, Phase::Start | Phase::Coordinate)));
}

#[test]
fn incumbent_never_worsens_and_phases_are_ordered() {
    for (name, n) in [("Rosenbrock", 6), ("Ackley", 6), ("Griewank", 6), ("Michalewicz", 5), ("H6", 6)] {
        let (p, _) = get_function(name, n).unwrap();
        for seed in 0..3 {
            let cfg = AbcdConfig {
                seed,
                max_evals: Some(20_000),
                ..AbcdConfig::default()
            };
            let r = abcd_solve(&p, &cfg).unwrap();
            assert!(r.trace_is_monotone(), "{name} seed {seed}");
            assert_eq!(r.best_f, p.eval_uncounted(&r.best_x));
            let rank = |ph: Phase| match ph {
                Phase::Start => 0,
                Phase::Coordinate => 1,
                Phase::Local => 2,
                Phase::Block => 3,
                Phase::Direct => unreachable!(),
            };
            assert!(r.trace.windows(2).all(|w| rank(w[0].phase) <= rank(w[1].phase)), "{name}");
            assert!(r.trace.iter().filter(|row| row.phase == Phase::Local).count() <= 1);
        }
    }
}

#[test]
fn runs_are_reproducible() {
    let (p, _) = get_function("Levy", 6).unwrap();
    let cfg = AbcdConfig {
        seed: 11,
        ..AbcdConfig::default()
    };
    let a = abcd_solve(&p, &cfg).unwrap();
    let b = abcd_solve(&p, &cfg).unwrap();
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.best_x, b.best_x);
    assert_eq!(a.evals, b.evals);
}
