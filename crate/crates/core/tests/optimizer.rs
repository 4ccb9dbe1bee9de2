use std::sync::Arc;

use resent_core::objective::entropy_estimate;
use resent_core::optimizer::{step, Termination};
use resent_core::spd::{sym_exp, trace_inner};
use resent_core::systems::{bouncing_ball_case, bouncing_ball_entropy, henon_case, lorenz_case};
use resent_core::{
    evaluate_metric, run, ConformalMetric, GridConfig, PolyBasis, RunConfig, SpdMatrix, StepRule, SymMatrix, SystemCase,
    TangentVector, Workers,
};
use resent_testkit::gen;

fn config(case: &SystemCase, degree: usize, counts: &[usize], a: f64, iters: usize) -> RunConfig {
    RunConfig {
        grid: GridConfig::new(counts.to_vec()),
        step_rule: StepRule::new(a, 0.0).unwrap(),
        max_iters: iters,
        initial: ConformalMetric::identity(Arc::new(PolyBasis::new(case.dim(), degree, false).unwrap())),
    }
}

#[test]
fn zero_iterations_report_the_initial_value() {
    let case = henon_case();
    let cfg = config(&case, 3, &[200, 200], 16.0, 0);
    let r = run(&case, &cfg, &Workers::global()).unwrap();
    let initial = entropy_estimate(&case, &cfg.initial, &cfg.grid, &Workers::global()).unwrap();
    assert_eq!(r.records.len(), 1);
    assert_eq!(r.best_value, initial);
    assert_eq!(r.best_iteration, 1);
    assert_eq!(r.records[0].theta, 0.0);
}

#[test]
fn run_invariants_hold() {
    let cases = [
        (henon_case(), 3, vec![120, 120], 16.0),
        (bouncing_ball_case(0.1, 2.0).unwrap(), 0, vec![150, 150], 1.0),
        (lorenz_case(10.0, 28.0, 8.0 / 3.0).unwrap(), 2, vec![30, 10, 20], 2.0),
    ];
    for (case, degree, counts, a) in cases {
        let cfg = config(&case, degree, &counts, a, 25);
        let r = run(&case, &cfg, &Workers::global()).unwrap();
        assert_eq!(r.termination, Termination::MaxIters);
        assert_eq!(r.records.len(), 26);
        let min = r.records.iter().map(|rec| rec.value).fold(f64::INFINITY, f64::min);
        assert_eq!(r.best_value, min);
        assert_eq!(r.records[r.best_iteration - 1].value, r.best_value);
        for (i, rec) in r.records.iter().enumerate() {
            assert_eq!(rec.k, i + 1);
            assert!(rec.best_value <= rec.value);
            if i > 0 {
                assert!(rec.best_value <= r.records[i - 1].best_value);
            }
            let expected_theta = if i + 1 == r.records.len() { 0.0 } else { a / (i + 1) as f64 };
            assert_eq!(rec.theta, expected_theta);
        }
        let again = evaluate_metric(&case, &r.best_metric, &cfg.grid, &Workers::global()).unwrap();
        assert!((again - r.best_value).abs() <= 1e-12, "{} vs {}", again, r.best_value);
        if let Some(h) = case.reference.entropy {
            assert!(r.records.iter().all(|rec| rec.value >= h - 1e-6), "{}", case.name);
        }
        if let Some(lower) = case.reference.lower {
            assert!(r.records.iter().all(|rec| rec.value >= lower - 1e-6), "{}", case.name);
        }
    }
}

#[test]
fn runs_do_not_depend_on_worker_count() {
    let case = lorenz_case(10.0, 28.0, 8.0 / 3.0).unwrap();
    let cfg = config(&case, 2, &[40, 12, 24], 2.0, 12);
    let strip = |r: resent_core::RunResult| {
        r.records
            .into_iter()
            .map(|mut rec| {
                rec.wall_time_ms = 0.0;
                rec
            })
            .collect::<Vec<_>>()
    };
    let one = strip(run(&case, &cfg, &Workers::with_threads(1).unwrap()).unwrap());
    for n in [2, 4] {
        let many = strip(run(&case, &cfg, &Workers::with_threads(n).unwrap()).unwrap());
        assert_eq!(one, many, "{n} workers");
    }
}

#[test]
fn bouncing_ball_converges_to_the_closed_form() {
    let case = bouncing_ball_case(0.1, 2.0).unwrap();
    let r = run(&case, &config(&case, 0, &[300, 300], 1.0, 40), &Workers::global()).unwrap();
    let h = bouncing_ball_entropy(0.1, 2.0);
    assert!(r.best_value >= h - 1e-9);
    assert!(r.best_value - h < 1e-6, "{}", r.best_value - h);
}

#[test]
fn steps_have_unit_speed() {
    let mut rng = gen::rng(41);
    let basis = Arc::new(PolyBasis::new(2, 2, false).unwrap());
    for _ in 0..20 {
        let m = gen::metric(&mut rng, &basis, 2.0, 0.5, 50.0);
        let s1: Vec<f64> = (0..basis.len()).map(|i| (i as f64 - 2.0) * 0.3).collect();
        let s2 = gen::sym(&mut rng, 2);
        let s = TangentVector::new(s1.clone(), s2.clone(), &m.p);
        let theta = 1e-6;
        let next = step(&m, &s, theta).unwrap();
        let da: Vec<f64> = next.coeffs.coefficients().iter().zip(m.coeffs.coefficients()).map(|(u, v)| (u - v) / theta).collect();
        let dp = SymMatrix::new((next.p.as_matrix() - m.p.as_matrix()) / theta).unwrap();
        let speed2 = da.iter().map(|v| v * v).sum::<f64>() + trace_inner(&m.p, &dp, &dp).unwrap();
        assert!((speed2.sqrt() - 1.0).abs() < 1e-4, "{}", speed2.sqrt());
        let along = s.inner(&da, &dp, &m.p);
        assert!((along + s.norm).abs() < 1e-4 * s.norm);
    }
}

#[test]
fn matrix_step_at_identity_is_the_exponential() {
    let basis = Arc::new(PolyBasis::new(2, 0, false).unwrap());
    let m = ConformalMetric::identity(basis);
    let s2 = SymMatrix::from_row_slice(2, &[-1.0, 0.0, 0.0, 1.0]).unwrap().scaled(1.0 / 2f64.sqrt());
    let s = TangentVector::new(vec![], s2.clone(), &m.p);
    assert!((s.norm - 1.0).abs() < 1e-15);
    let next = step(&m, &s, 0.7).unwrap();
    let expected = SpdMatrix::new(sym_exp(&(s2.as_matrix() * -0.7))).unwrap();
    assert!((next.p.as_matrix() - expected.as_matrix()).norm() < 1e-13);
}
