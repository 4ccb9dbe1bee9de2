//! Identities of the SPD geodesic, the Horn and Weyl majorizations, and
//! Lyapunov residuals.

use nalgebra::DMatrix;
use rand::Rng;

use resent_core::spd::{self, SpdMatrix, SymMatrix};

use crate::gen::{self, TestRng};
use crate::{oracle, Report, Tally};

/// Condition number bound for random SPD inputs.
pub const MAX_COND: f64 = 1e6;
/// Condition number bound for general matrices; products of two stay
/// within [`MAX_COND`].
pub const GL_COND: f64 = 1e3;

fn rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

fn dim(rng: &mut TestRng) -> usize {
    rng.gen_range(2..=5)
}

fn pair(rng: &mut TestRng) -> (SpdMatrix, SpdMatrix) {
    let n = dim(rng);
    (gen::spd(rng, n, MAX_COND), gen::spd(rng, n, MAX_COND))
}

fn geo(p: &SpdMatrix, q: &SpdMatrix, t: f64) -> DMatrix<f64> {
    spd::geodesic_point(p, q, t).expect("valid geodesic").as_matrix().clone()
}

pub fn endpoints(instances: usize, seed: u64) -> Report {
    let mut rng = gen::rng(seed);
    let mut t = Tally::new("geodesic endpoints", 1e-10);
    for i in 0..instances {
        let (p, q) = pair(&mut rng);
        t.record(rel(&geo(&p, &q, 0.0), p.as_matrix()), || format!("instance {i}, θ = 0"));
        t.record(rel(&geo(&p, &q, 1.0), q.as_matrix()), || format!("instance {i}, θ = 1"));
    }
    t.finish()
}

/// The core geodesic against the Cholesky-based formula.
pub fn cholesky_agreement(instances: usize, seed: u64) -> Report {
    let mut rng = gen::rng(seed);
    let mut t = Tally::new("geodesic vs Cholesky formula", 1e-9);
    for i in 0..instances {
        let (p, q) = pair(&mut rng);
        let th: f64 = rng.gen();
        let want = oracle::geodesic_cholesky(p.as_matrix(), q.as_matrix(), th);
        t.record(rel(&geo(&p, &q, th), &want), || format!("instance {i}, θ = {th}"));
    }
    t.finish()
}

pub fn scalar_rule(instances: usize, seed: u64) -> Report {
    let mut rng = gen::rng(seed);
    let mut t = Tally::new("geodesic scalar rule", 1e-10);
    for i in 0..instances {
        let (p, q) = pair(&mut rng);
        let a = 10f64.powf(rng.gen_range(-2.0..2.0));
        let b = 10f64.powf(rng.gen_range(-2.0..2.0));
        let th: f64 = rng.gen();
        let lhs = geo(&p.scaled(a).unwrap(), &q.scaled(b).unwrap(), th);
        let rhs = geo(&p, &q, th) * (a.powf(1.0 - th) * b.powf(th));
        t.record(rel(&lhs, &rhs), || format!("instance {i}, a = {a}, b = {b}, θ = {th}"));
    }
    t.finish()
}

pub fn congruence(instances: usize, seed: u64) -> Report {
    let mut rng = gen::rng(seed);
    let mut t = Tally::new("geodesic congruence invariance", 1e-9);
    for i in 0..instances {
        // keep the congruent pair within the same conditioning bound
        let n = dim(&mut rng);
        let p = gen::spd(&mut rng, n, MAX_COND / 1e2);
        let q = gen::spd(&mut rng, n, MAX_COND / 1e2);
        let g = gen::gl(&mut rng, n, 10.0);
        let th: f64 = rng.gen();
        let conj = |m: &SpdMatrix| SpdMatrix::new(&g * m.as_matrix() * g.transpose()).expect("congruent SPD");
        let lhs = &g * geo(&p, &q, th) * g.transpose();
        let rhs = geo(&conj(&p), &conj(&q), th);
        t.record(rel(&lhs, &rhs), || format!("instance {i}, θ = {th}"));
    }
    t.finish()
}

pub fn inversion(instances: usize, seed: u64) -> Report {
    let mut rng = gen::rng(seed);
    let mut t = Tally::new("geodesic inversion", 1e-9);
    for i in 0..instances {
        let (p, q) = pair(&mut rng);
        let th: f64 = rng.gen();
        // SPD inverses through the eigendecomposition, which perturb the
        // matrix only at the level of its own rounding
        let inv = |m: &SpdMatrix| SpdMatrix::new(m.factor().inv).expect("SPD inverse");
        let lhs = inv(&spd::geodesic_point(&p, &q, th).expect("valid geodesic")).as_matrix().clone();
        let rhs = geo(&inv(&p), &inv(&q), th);
        t.record(rel(&lhs, &rhs), || format!("instance {i}, θ = {th}"));
    }
    t.finish()
}

/// `γ_v(θ) = p #_θ γ_v(1)`, including `θ = 1`.
pub fn velocity_consistency(instances: usize, seed: u64) -> Report {
    let mut rng = gen::rng(seed);
    let mut t = Tally::new("velocity geodesic consistency", 1e-9);
    for i in 0..instances {
        let n = dim(&mut rng);
        let p = gen::spd(&mut rng, n, MAX_COND);
        // tangent vectors of moderate length so that γ_v(1) stays well conditioned
        let f = p.factor();
        let z = gen::sym(&mut rng, n);
        let v = SymMatrix::new(&f.sqrt * z.as_matrix() * &f.sqrt * 0.5).unwrap();
        let end = spd::geodesic_from_velocity(&p, &v, 1.0).expect("valid");
        let th: f64 = rng.gen();
        let along = spd::geodesic_from_velocity(&p, &v, th).expect("valid");
        t.record(rel(&geo(&p, &end, 1.0), end.as_matrix()), || format!("instance {i}, θ = 1"));
        t.record(rel(&geo(&p, &end, th), along.as_matrix()), || format!("instance {i}, θ = {th}"));
    }
    t.finish()
}

fn log2_all(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| x.log2()).collect()
}

/// Records the majorization `x ≼ y` for descending vectors: every partial
/// sum of `x` at most that of `y`, totals equal.
fn majorization(t: &mut Tally, x: &[f64], y: &[f64], ctx: impl Fn() -> String) {
    let (mut sx, mut sy) = (0.0, 0.0);
    let scale = 1.0 + y.iter().map(|v| v.abs()).sum::<f64>();
    for k in 0..x.len() {
        sx += x[k];
        sy += y[k];
        let excess = if k + 1 == x.len() { (sx - sy).abs() } else { (sx - sy).max(0.0) };
        t.record(excess / scale, || format!("{}, k = {}", ctx(), k + 1));
    }
}

pub fn horn(instances: usize, seed: u64) -> Report {
    let mut rng = gen::rng(seed);
    let mut t = Tally::new("Horn majorization", 1e-9);
    for i in 0..instances {
        let n = dim(&mut rng);
        let g = gen::gl(&mut rng, n, GL_COND);
        let h = gen::gl(&mut rng, n, GL_COND);
        let lhs = log2_all(&spd::singular_values(&(&g * &h)).expect("converges"));
        let sg = spd::log_singular_vector(&g).expect("invertible");
        let sh = spd::log_singular_vector(&h).expect("invertible");
        let rhs: Vec<f64> = sg.iter().zip(sh.iter()).map(|(a, b)| a + b).collect();
        majorization(&mut t, &lhs, &rhs, || format!("instance {i}"));
    }
    t.finish()
}

pub fn weyl(instances: usize, seed: u64) -> Report {
    let mut rng = gen::rng(seed);
    let mut t = Tally::new("Weyl majorization", 1e-9);
    for i in 0..instances {
        let n = dim(&mut rng);
        let g = gen::gl(&mut rng, n, GL_COND);
        let chi = log2_all(&oracle::eigenvalue_moduli(&g));
        let sigma: Vec<f64> = spd::log_singular_vector(&g).expect("invertible").iter().copied().collect();
        majorization(&mut t, &chi, &sigma, || format!("instance {i}"));
    }
    t.finish()
}

/// Residual of `p^{1/2} X + X p^{1/2} = h`, relative to
/// `‖h‖ + 2‖p^{1/2}‖‖X‖`, with the
/// square root taken from a different eigensolver.
pub fn lyapunov_residual(instances: usize, seed: u64) -> Report {
    let mut rng = gen::rng(seed);
    let mut t = Tally::new("Lyapunov residual", 1e-12);
    for i in 0..instances {
        let n = dim(&mut rng);
        let p = gen::spd(&mut rng, n, MAX_COND);
        let h = gen::sym(&mut rng, n);
        let x = spd::lyapunov_sqrt_solve(&p, &h).expect("valid");
        let s = oracle::sqrt_spd(p.as_matrix());
        let res = &s * x.as_matrix() + x.as_matrix() * &s - h.as_matrix();
        let size = h.as_matrix().norm() + 2.0 * s.norm() * x.as_matrix().norm();
        t.record(res.norm() / size, || format!("instance {i}"));
    }
    t.finish()
}

/// Every geometry suite with `instances` draws each.
pub fn all(instances: usize, seed: u64) -> Vec<Report> {
    vec![
        endpoints(instances, seed),
        cholesky_agreement(instances, seed + 1),
        scalar_rule(instances, seed + 2),
        congruence(instances, seed + 3),
        inversion(instances, seed + 4),
        velocity_consistency(instances, seed + 5),
        horn(instances, seed + 6),
        weyl(instances, seed + 7),
        lyapunov_residual(instances, seed + 8),
    ]
}
