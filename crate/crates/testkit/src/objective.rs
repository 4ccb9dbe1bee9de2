//! Pointwise functional checks: convexity along product geodesics, agreement
//! with a from-scratch evaluation, the choice of `k*`, scale invariance and
//! the small-time limit linking flows to their time-t maps.

use std::f64::consts::LN_2;
use std::sync::Arc;

use rand::Rng;

use resent_core::objective::{entropy_estimate, sigma_at};
use resent_core::systems::{bouncing_ball_case, henon_case, lorenz_case, SystemCase};
use resent_core::{ConformalMetric, GridConfig, PolyBasis, PolyCoeffs, Workers};

use crate::gen::{self, TestRng};
use crate::{oracle, Report, Tally};

/// The three built-in cases at their standard parameters.
pub fn standard_cases() -> Vec<SystemCase> {
    vec![
        henon_case(),
        bouncing_ball_case(0.1, 2.0).expect("valid parameters"),
        lorenz_case(10.0, 28.0, 8.0 / 3.0).expect("valid parameters"),
    ]
}

/// Basis of the case's default degree, without constant term.
pub fn default_basis(case: &SystemCase) -> Arc<PolyBasis> {
    Arc::new(PolyBasis::new(case.dim(), case.defaults.degree, false).expect("valid basis"))
}

/// Random metric whose polynomial changes by `O(1)` across the domain.
pub fn random_metric(rng: &mut TestRng, case: &SystemCase, radius: f64) -> ConformalMetric {
    gen::metric(rng, &default_basis(case), radius, 0.5, 1e2)
}

/// `Σ^{P #_θ Q}(x) ≤ (1-θ) Σ^P(x) + θ Σ^Q(x) + slack` for θ = 0.1, …, 0.9.
pub fn convexity(case: &SystemCase, pairs: usize, points: usize, seed: u64) -> Report {
    let mut rng = gen::rng(seed);
    let radius = gen::domain_radius(case);
    let mut t = Tally::new(format!("geodesic convexity ({})", case.name), 1e-9);
    for i in 0..pairs {
        let p = random_metric(&mut rng, case, radius);
        let q = random_metric(&mut rng, case, radius);
        let mids: Vec<(f64, ConformalMetric)> = (1..=9)
            .map(|j| {
                let th = j as f64 / 10.0;
                (th, p.geodesic(&q, th).expect("valid geodesic"))
            })
            .collect();
        for _ in 0..points {
            let x = gen::domain_point(&mut rng, case);
            let (sp, sq) = match (sigma_at(case, &p, &x), sigma_at(case, &q, &x)) {
                (Ok(a), Ok(b)) => (a.value, b.value),
                (Err(e), _) | (_, Err(e)) => {
                    t.fail(format!("pair {i}: evaluation failed at {x:?}: {e}"));
                    continue;
                }
            };
            for (th, m) in &mids {
                match sigma_at(case, m, &x) {
                    Ok(sm) => {
                        let excess = sm.value - ((1.0 - th) * sp + th * sq);
                        t.record(excess.max(0.0), || format!("pair {i}, θ = {th}, x = {x:?}"));
                    }
                    Err(e) => t.fail(format!("pair {i}: evaluation failed at {x:?}: {e}")),
                }
            }
        }
    }
    t.finish()
}

/// The core pointwise functional against [`oracle::pointwise_value`].
pub fn pointwise_agreement(case: &SystemCase, instances: usize, seed: u64) -> Report {
    let mut rng = gen::rng(seed);
    let radius = gen::domain_radius(case);
    let mut t = Tally::new(format!("pointwise value vs direct evaluation ({})", case.name), 1e-9);
    for i in 0..instances {
        let m = random_metric(&mut rng, case, radius);
        let x = gen::domain_point(&mut rng, case);
        let got = sigma_at(case, &m, &x).expect("finite value").value;
        let want = oracle::pointwise_value(case, &m, &x);
        t.record((got - want).abs() / (1.0 + want.abs()), || format!("instance {i}, x = {x:?}"));
    }
    t.finish()
}

/// `value = max_k Σ_{i≤k} spectrum_i`, attained first at `k*`.
pub fn k_star_optimality(case: &SystemCase, instances: usize, seed: u64) -> Report {
    let mut rng = gen::rng(seed);
    let radius = gen::domain_radius(case);
    let mut t = Tally::new(format!("k* optimality ({})", case.name), 1e-12);
    for i in 0..instances {
        let m = random_metric(&mut rng, case, radius);
        let x = gen::domain_point(&mut rng, case);
        let e = sigma_at(case, &m, &x).expect("finite value");
        let sums: Vec<f64> = (0..=e.spectrum.len()).map(|k| oracle::partial_sum(&e.spectrum, k)).collect();
        let best = sums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let first = sums.iter().position(|&s| s == best).expect("non-empty");
        let scale = 1.0 + best.abs();
        t.record((e.value - best).abs() / scale, || format!("instance {i}: value"));
        t.record((sums[e.k_star] - best).abs() / scale, || format!("instance {i}: k* = {}", e.k_star));
        if e.k_star != first && (sums[first] - sums[e.k_star]).abs() > 0.0 {
            t.fail(format!("instance {i}: k* = {} but first maximizer is {first}", e.k_star));
        }
    }
    t.finish()
}

/// Rescaling `p`, or adding a constant to `r`, leaves the estimate unchanged.
pub fn scale_invariance(case: &SystemCase, instances: usize, counts: &[usize], seed: u64) -> Report {
    let mut rng = gen::rng(seed);
    let radius = gen::domain_radius(case);
    let grid = GridConfig::without_refinement(counts.to_vec());
    let workers = Workers::global();
    let mut t = Tally::new(format!("scale invariance ({})", case.name), 1e-12);
    let with_const = Arc::new(PolyBasis::new(case.dim(), case.defaults.degree, true).expect("valid basis"));
    for i in 0..instances {
        let m = gen::metric(&mut rng, &with_const, radius, 0.5, 1e2);
        let base = entropy_estimate(case, &m, &grid, &workers).expect("finite");
        let scale = 1.0 + base.abs();
        for s in [1e-3, 1.0, 1e3] {
            let ms = ConformalMetric::new(m.coeffs.clone(), m.p.scaled(s).expect("SPD")).expect("dims");
            let v = entropy_estimate(case, &ms, &grid, &workers).expect("finite");
            t.record((v - base).abs() / scale, || format!("instance {i}, s = {s}"));
        }
        let c: f64 = rng.gen_range(-5.0..5.0);
        let mut a = m.coeffs.coefficients().to_vec();
        a[0] += c;
        let shifted = ConformalMetric::new(PolyCoeffs::new(with_const.clone(), a).expect("finite"), m.p.clone()).expect("dims");
        let v = entropy_estimate(case, &shifted, &grid, &workers).expect("finite");
        t.record((v - base).abs() / scale, || format!("instance {i}, constant shift {c}"));
    }
    t.finish()
}

/// Partial sums of the flow spectrum against `(2 ln 2 / t)` times those of
/// the `log₂` singular values of the time-`t` map, for the Lorenz system.
pub fn small_time_limit(points: usize, t_final: f64, seed: u64) -> Report {
    let case = lorenz_case(10.0, 28.0, 8.0 / 3.0).expect("valid parameters");
    let mut rng = gen::rng(seed);
    let radius = gen::domain_radius(&case);
    let mut t = Tally::new("flow spectrum vs small-time map limit (lorenz)", 5e-2);
    for i in 0..points {
        let m = gen::metric(&mut rng, &default_basis(&case), radius, 0.5, 1e2);
        let x = gen::domain_point(&mut rng, &case);
        let zeta = sigma_at(&case, &m, &x).expect("finite").spectrum;
        let logs = oracle::finite_time_log_singular_values(&case, &m, &x, t_final, 100);
        for k in 1..=zeta.len() {
            let lhs = oracle::partial_sum(&zeta, k);
            let rhs = 2.0 * LN_2 / t_final * oracle::partial_sum(&logs, k);
            t.record((lhs - rhs).abs(), || format!("point {i}, k = {k}: {lhs} vs {rhs}"));
        }
    }
    t.finish()
}
