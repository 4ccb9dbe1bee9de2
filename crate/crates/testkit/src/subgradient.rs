//! Checks on the computed subgradients: the subgradient inequality along
//! product geodesics, one-sided difference quotients at smooth points, the
//! Riesz representation of `s₂` and the Lyapunov-based derivative of `ζ`.

use nalgebra::DMatrix;
use rand::Rng;

use resent_core::objective::{grid_values, maximize, sigma_at};
use resent_core::spd::{self, SymMatrix};
use resent_core::subgradient::{
    continuous_matrix_subgrad, discrete_matrix_subgrad, log_singular_gradient, top_eigenprojector, zeta_derivative,
    zeta_hat_derivative,
};
use resent_core::systems::{Grid, SystemCase};
use resent_core::{full_subgradient, ConformalMetric, GridConfig, InnerMaxResult, PolyCoeffs, TangentVector, Workers};

use crate::gen::{self, TestRng};
use crate::objective::random_metric;
use crate::{oracle, Report, Tally};

/// Small grids used by the subgradient suites, per case dimension.
pub fn small_grid(case: &SystemCase) -> Vec<usize> {
    match case.dim() {
        2 => vec![40, 40],
        _ => vec![16, 8, 16],
    }
}

/// `(a + θ v₁, γ_{v₂}(θ))`.
pub fn move_along(m: &ConformalMetric, v1: &[f64], v2: &SymMatrix, theta: f64) -> ConformalMetric {
    let a: Vec<f64> = m.coeffs.coefficients().iter().zip(v1).map(|(a, v)| a + theta * v).collect();
    let p = spd::geodesic_from_velocity(&m.p, v2, theta).expect("valid geodesic");
    ConformalMetric::new(PolyCoeffs::new(m.basis().clone(), a).expect("finite"), p).expect("dims")
}

struct Instance {
    metric: ConformalMetric,
    inner: InnerMaxResult,
    s: TangentVector,
}

fn instance(rng: &mut TestRng, case: &SystemCase, radius: f64, grid: &GridConfig, workers: &Workers) -> Instance {
    let metric = random_metric(rng, case, radius);
    let inner = maximize(case, &metric, grid, workers).expect("finite maximum");
    let s = full_subgradient(case, &metric, &inner).expect("subgradient");
    Instance { metric, inner, s }
}

/// `J(γ_v(θ)) ≥ J + θ <s, v> - 1e-7` for unit `v` and θ ∈ {1e-3, 1e-2, 1e-1}.
pub fn inequality(case: &SystemCase, instances: usize, directions: usize, seed: u64) -> Report {
    let mut rng = gen::rng(seed);
    let radius = gen::domain_radius(case);
    let grid = GridConfig::without_refinement(small_grid(case));
    let workers = Workers::global();
    let mut t = Tally::new(format!("subgradient inequality ({})", case.name), 1e-7);
    for i in 0..instances {
        let inst = instance(&mut rng, case, radius, &grid, &workers);
        for d in 0..directions {
            let (v1, v2) = gen::unit_tangent(&mut rng, &inst.metric);
            let slope = inst.s.inner(&v1, &v2, &inst.metric.p);
            for theta in [1e-3, 1e-2, 1e-1] {
                let moved = move_along(&inst.metric, &v1, &v2, theta);
                let j = maximize(case, &moved, &grid, &workers).expect("finite maximum").value;
                let deficit = inst.inner.value + theta * slope - j;
                t.record(deficit.max(0.0), || format!("instance {i}, direction {d}, θ = {theta}"));
            }
        }
    }
    t.finish()
}

/// Grid points whose value is within `margin` of the maximum.
fn near_maximal(case: &SystemCase, m: &ConformalMetric, counts: &[usize], margin: f64) -> Vec<Vec<f64>> {
    let grid = Grid::coarse(&case.domain, counts).expect("valid grid");
    let values = grid_values(case, m, &grid).expect("finite values");
    let top = values.iter().map(|(_, v)| *v).fold(f64::NEG_INFINITY, f64::max);
    let n = case.dim();
    let (mut u, mut x) = (vec![0.0; n], vec![0.0; n]);
    values
        .iter()
        .filter(|(_, v)| *v >= top - margin)
        .map(|(i, _)| {
            grid.point_at(*i, &mut u, &mut x);
            x.clone()
        })
        .collect()
}

fn subgradient_at(case: &SystemCase, m: &ConformalMetric, x: &[f64]) -> TangentVector {
    let eval = sigma_at(case, m, x).expect("finite value");
    let inner = InnerMaxResult {
        x_star: x.to_vec(),
        x_star_param: x.to_vec(),
        k_star: eval.k_star,
        value: eval.value,
        spectrum: eval.spectrum,
        gap_ok: true,
        refined: false,
    };
    full_subgradient(case, m, &inner).expect("subgradient")
}

fn same_subgradient(s: &TangentVector, t: &TangentVector, p: &spd::SpdMatrix) -> bool {
    let d1: Vec<f64> = s.s1.iter().zip(&t.s1).map(|(a, b)| a - b).collect();
    let d2 = SymMatrix::new(s.s2.as_matrix() - t.s2.as_matrix()).expect("square");
    TangentVector::new(d1, d2, p).norm <= 1e-9 * (1.0 + s.norm)
}

/// `(J(γ_v(θ)) - J)/θ` at θ = 1e-5 against `<s, v>` at smooth instances.
///
/// An instance counts as smooth when the spectral gap holds and every grid
/// point within 1e-6 of the maximum yields the same subgradient, which
/// covers a strict maximizer as well as ties between equivalent points.
/// A direction is skipped when the maximizer of the moved metric leaves
/// that near-maximal set or its `k*` changes, since the step then crosses a
/// kink of the grid maximum. Returns the report and the numbers of skipped instances and
/// skipped directions.
pub fn directional(case: &SystemCase, instances: usize, directions: usize, seed: u64) -> (Report, usize, usize) {
    const THETA: f64 = 1e-5;
    const MARGIN: f64 = 1e-6;
    let mut rng = gen::rng(seed);
    let radius = gen::domain_radius(case);
    let counts = small_grid(case);
    let grid = GridConfig::without_refinement(counts.clone());
    let workers = Workers::global();
    let mut t = Tally::new(format!("directional difference quotient ({})", case.name), 1e-3);
    let (mut skipped, mut crossed) = (0, 0);
    for i in 0..instances {
        let inst = instance(&mut rng, case, radius, &grid, &workers);
        let active = near_maximal(case, &inst.metric, &counts, MARGIN);
        let smooth = inst.inner.gap_ok
            && active
                .iter()
                .all(|x| same_subgradient(&inst.s, &subgradient_at(case, &inst.metric, x), &inst.metric.p));
        if !smooth {
            skipped += 1;
            continue;
        }
        for d in 0..directions {
            let (v1, v2) = gen::unit_tangent(&mut rng, &inst.metric);
            let slope = inst.s.inner(&v1, &v2, &inst.metric.p);
            let moved = move_along(&inst.metric, &v1, &v2, THETA);
            let r = maximize(case, &moved, &grid, &workers).expect("finite maximum");
            if !active.iter().any(|x| *x == r.x_star) || r.k_star != inst.inner.k_star {
                crossed += 1;
                continue;
            }
            let quotient = (r.value - inst.inner.value) / THETA;
            t.record((quotient - slope).abs(), || format!("instance {i}, direction {d}: {quotient} vs {slope}"));
        }
    }
    (t.finish(), skipped, crossed)
}

fn random_jacobian(rng: &mut TestRng, case: &SystemCase) -> DMatrix<f64> {
    let x = gen::domain_point(rng, case);
    case.dynamics.jacobian(&x)
}

/// `tr[Sᵀ Dζ(p) v] = <s₂, v>_p` on the standard basis of symmetric matrices.
pub fn riesz_identity(case: &SystemCase, instances: usize, seed: u64) -> Report {
    let mut rng = gen::rng(seed);
    let n = case.dim();
    let mut t = Tally::new(format!("Riesz identity ({})", case.name), 1e-10);
    for i in 0..instances {
        let p = gen::spd(&mut rng, n, 1e2);
        let a = random_jacobian(&mut rng, case);
        let k = rng.gen_range(1..=n);
        let f = p.factor();
        let (s, s2) = if case.is_discrete() {
            let x = &f.sqrt * &a * &f.inv_sqrt;
            (log_singular_gradient(&x, k).expect("invertible"), discrete_matrix_subgrad(&p, &a, k).expect("subgradient"))
        } else {
            let x = &f.sqrt * &a * &f.inv_sqrt;
            (top_eigenprojector(&(&x + x.transpose()), k), continuous_matrix_subgrad(&p, &a, k).expect("subgradient"))
        };
        for v in spd::standard_sym_basis(n) {
            let d = if case.is_discrete() { zeta_derivative(&f, &a, &v) } else { zeta_hat_derivative(&f, &a, &v) };
            let lhs = s.component_mul(&d).sum();
            let rhs = f.inner(s2.as_matrix(), &v);
            let scale = s.norm() * d.norm();
            t.record((lhs - rhs).abs() / scale.max(f64::MIN_POSITIVE), || format!("instance {i}, k = {k}"));
        }
    }
    t.finish()
}

/// `Dζ(p)v` and `Dζ̂(p)v` against central differences of an independently
/// computed `ζ`, relative to `‖ζ(p)‖ ‖p⁻¹ v‖`.
pub fn lyapunov_derivative(case: &SystemCase, instances: usize, seed: u64) -> Report {
    const H: f64 = 1e-5;
    let mut rng = gen::rng(seed);
    let n = case.dim();
    let mut t = Tally::new(format!("Lyapunov derivative vs central differences ({})", case.name), 1e-6);
    for i in 0..instances {
        let p = gen::spd(&mut rng, n, 1e2);
        let a = random_jacobian(&mut rng, case);
        let v = gen::sym(&mut rng, n).into_matrix();
        let f = p.factor();
        let pm = p.as_matrix();
        let size = oracle::zeta(pm, &a).norm() * (&f.inv * &v).norm();
        let got = zeta_derivative(&f, &a, &v);
        let want = oracle::central_difference(|q| oracle::zeta(q, &a), pm, &v, H);
        t.record((got - want).norm() / size, || format!("instance {i}, ζ"));
        let got = zeta_hat_derivative(&f, &a, &v);
        let want = oracle::central_difference(|q| oracle::zeta_hat(q, &a), pm, &v, H);
        t.record((got - want).norm() / size, || format!("instance {i}, ζ̂"));
    }
    t.finish()
}
