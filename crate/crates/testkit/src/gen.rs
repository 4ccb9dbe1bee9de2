//! Seeded random inputs: matrices, metrics and domain points.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use resent_core::spd::{SpdMatrix, SymMatrix};
use resent_core::systems::SystemCase;
use resent_core::{ConformalMetric, PolyBasis, PolyCoeffs};

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut TestRng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn orthogonal(rng: &mut TestRng, n: usize) -> DMatrix<f64> {
    let qr = gaussian(rng, n, n).qr();
    let (q, r) = (qr.q(), qr.r());
    // fix column signs so the distribution is Haar
    let mut q = q;
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// SPD matrix with condition number at most `max_cond` and eigenvalues
/// spread log-uniformly around 1.
pub fn spd(rng: &mut TestRng, n: usize, max_cond: f64) -> SpdMatrix {
    let q = orthogonal(rng, n);
    let half = 0.5 * max_cond.log10();
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| {
        10f64.powf(rng.gen_range(-half..=half))
    }));
    SpdMatrix::new(&q * d * q.transpose()).expect("generated matrix is SPD")
}

/// Invertible matrix with condition number at most `max_cond`.
pub fn gl(rng: &mut TestRng, n: usize, max_cond: f64) -> DMatrix<f64> {
    let (u, v) = (orthogonal(rng, n), orthogonal(rng, n));
    let half = 0.5 * max_cond.log10();
    let s = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| {
        10f64.powf(rng.gen_range(-half..=half))
    }));
    u * s * v.transpose()
}

pub fn sym(rng: &mut TestRng, n: usize) -> SymMatrix {
    SymMatrix::new(gaussian(rng, n, n)).expect("square")
}

/// Random conformal metric whose polynomial varies by roughly `spread` over
/// a region of radius `radius`, and whose `p` has condition at most `max_cond`.
pub fn metric(
    rng: &mut TestRng,
    basis: &Arc<PolyBasis>,
    radius: f64,
    spread: f64,
    max_cond: f64,
) -> ConformalMetric {
    let a: Vec<f64> = basis
        .monomials()
        .map(|m| {
            let deg: u32 = m.iter().sum();
            let z: f64 = rng.sample(StandardNormal);
            spread * z / radius.powi(deg as i32).max(1e-300)
        })
        .collect();
    let p = spd(rng, basis.n_vars(), max_cond);
    ConformalMetric::new(PolyCoeffs::new(basis.clone(), a).expect("finite"), p).expect("dims")
}

/// Uniform point of the parameter box pushed through the chart.
pub fn domain_point(rng: &mut TestRng, case: &SystemCase) -> Vec<f64> {
    let u: Vec<f64> = case
        .domain
        .param_axes()
        .iter()
        .map(|ax| rng.gen_range(ax.lower..=ax.upper))
        .collect();
    let mut x = vec![0.0; u.len()];
    case.domain.chart(&u, &mut x);
    x
}

/// Rough extent of the domain, used to scale random polynomials.
pub fn domain_radius(case: &SystemCase) -> f64 {
    let mut r: f64 = 1.0;
    let mut g = rng(0);
    for _ in 0..200 {
        let x = domain_point(&mut g, case);
        r = r.max(x.iter().map(|v| v.abs()).fold(0.0, f64::max));
    }
    r
}

/// Random tangent vector `(v₁, v₂)` at `m`, of unit product norm.
pub fn unit_tangent(rng: &mut TestRng, m: &ConformalMetric) -> (Vec<f64>, SymMatrix) {
    let n = m.dim();
    let v1: Vec<f64> = (0..m.basis().len()).map(|_| rng.sample(StandardNormal)).collect();
    let f = m.p.factor();
    // a standard normal in the p-metric: p^{1/2} Z p^{1/2}
    let z = sym(rng, n);
    let v2 = &f.sqrt * z.as_matrix() * &f.sqrt;
    let e: f64 = v1.iter().map(|x| x * x).sum();
    let norm = (e + f.inner(&v2, &v2)).sqrt();
    (
        v1.iter().map(|x| x / norm).collect(),
        SymMatrix::new(v2 / norm).expect("square"),
    )
}
