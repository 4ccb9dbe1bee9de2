//! Reference computations that avoid the code paths under test: Cholesky
//! instead of eigendecompositions for geodesics, complex Schur eigenvalues,
//! finite differences for derivatives and RK4 for flows.

use nalgebra::DMatrix;

use resent_core::systems::{Dynamics, SystemCase};
use resent_core::ConformalMetric;

/// `p #_θ q = L (C Cᵀ)^θ Lᵀ` with Cholesky factors `p = L Lᵀ`, `q = K Kᵀ`
/// and `C = L⁻¹ K`, the power taken through an SVD of `C`. Uses
/// `q #_{1-θ} p` when `θ < 1/2`.
pub fn geodesic_cholesky(p: &DMatrix<f64>, q: &DMatrix<f64>, theta: f64) -> DMatrix<f64> {
    if theta < 0.5 {
        return geodesic_cholesky(q, p, 1.0 - theta);
    }
    let n = p.nrows();
    let l = p.clone().cholesky().expect("p is SPD").unpack();
    let k = q.clone().cholesky().expect("q is SPD").unpack();
    let c = l.solve_lower_triangular(&k).expect("triangular factor is invertible");
    let svd = faer::Mat::<f64>::from_fn(n, n, |i, j| c[(i, j)]).svd().expect("SVD converges");
    let (u, s) = (svd.U(), svd.S().column_vector());
    let g = DMatrix::from_fn(n, n, |i, j| u[(i, j)] * s[j].powf(theta));
    let lg = &l * g;
    &lg * lg.transpose()
}

/// Square root of an SPD matrix through faer's symmetric eigensolver.
pub fn sqrt_spd(p: &DMatrix<f64>) -> DMatrix<f64> {
    let n = p.nrows();
    let m = faer::Mat::<f64>::from_fn(n, n, |i, j| 0.5 * (p[(i, j)] + p[(j, i)]));
    let e = m.self_adjoint_eigen(faer::Side::Lower).expect("eigensolver converges");
    let (u, s) = (e.U(), e.S().column_vector());
    DMatrix::from_fn(n, n, |i, j| (0..n).map(|k| u[(i, k)] * s[k].sqrt() * u[(j, k)]).sum())
}

/// Singular values, descending, as square roots of the eigenvalues of `gᵀg`.
/// Accurate only for moderately conditioned `g`.
pub fn singular_values_gram(g: &DMatrix<f64>) -> Vec<f64> {
    sym_eigenvalues(&(g.transpose() * g)).iter().map(|v| v.max(0.0).sqrt()).collect()
}

/// Moduli of the (possibly complex) eigenvalues, descending.
pub fn eigenvalue_moduli(g: &DMatrix<f64>) -> Vec<f64> {
    let mut m: Vec<f64> = g.complex_eigenvalues().iter().map(|c| c.norm()).collect();
    m.sort_by(|a, b| b.total_cmp(a));
    m
}

/// Eigenvalues of a symmetric matrix, descending.
pub fn sym_eigenvalues(h: &DMatrix<f64>) -> Vec<f64> {
    let mut e: Vec<f64> = ((h + h.transpose()) * 0.5).symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(|a, b| b.total_cmp(a));
    e
}

/// `p^{1/2} A p^{-1/2}` computed with [`sqrt_spd`].
pub fn zeta(p: &DMatrix<f64>, a: &DMatrix<f64>) -> DMatrix<f64> {
    let s = sqrt_spd(p);
    let si = s.clone().try_inverse().expect("invertible");
    s * a * si
}

pub fn zeta_hat(p: &DMatrix<f64>, a: &DMatrix<f64>) -> DMatrix<f64> {
    let x = zeta(p, a);
    &x + x.transpose()
}

/// Central difference of a matrix function along `v`.
pub fn central_difference(f: impl Fn(&DMatrix<f64>) -> DMatrix<f64>, p: &DMatrix<f64>, v: &DMatrix<f64>, h: f64) -> DMatrix<f64> {
    (f(&(p + v * h)) - f(&(p - v * h))) / (2.0 * h)
}

/// Sum of the `k` largest entries of `v` (already descending).
pub fn partial_sum(v: &[f64], k: usize) -> f64 {
    v.iter().take(k).sum()
}

/// Pointwise value computed from scratch: the Jacobian, the polynomial and
/// an SVD or symmetric eigensolve, with no reuse of the core evaluator.
pub fn pointwise_value(case: &SystemCase, m: &ConformalMetric, x: &[f64]) -> f64 {
    let a = case.dynamics.jacobian(x);
    let p = m.p.as_matrix();
    let r = |y: &[f64]| m.coeffs.eval(y).expect("finite polynomial");
    let spectrum: Vec<f64> = match &case.dynamics {
        Dynamics::Discrete(_) => {
            let fx = case.dynamics.image(x);
            let c = (0.5 * (r(&fx) - r(x))).exp();
            singular_values_gram(&(zeta(p, &a) * c)).iter().map(|s| s.log2()).collect()
        }
        Dynamics::Continuous(_) => {
            let fx = case.dynamics.image(x);
            let grad = m.coeffs.grad(x).expect("finite polynomial");
            let rdot: f64 = grad.iter().zip(&fx).map(|(g, f)| g * f).sum();
            let n = x.len();
            sym_eigenvalues(&(zeta_hat(p, &a) + DMatrix::identity(n, n) * rdot))
        }
    };
    spectrum.iter().filter(|&&s| s > 0.0).sum()
}

fn rk4_step(field: &dyn Fn(&[f64]) -> (Vec<f64>, DMatrix<f64>), x: &[f64], phi: &DMatrix<f64>, h: f64) -> (Vec<f64>, DMatrix<f64>) {
    let axpy = |x: &[f64], k: &[f64], s: f64| -> Vec<f64> { x.iter().zip(k).map(|(a, b)| a + s * b).collect() };
    let (f1, a1) = field(x);
    let k1 = &a1 * phi;
    let x2 = axpy(x, &f1, 0.5 * h);
    let p2 = phi + &k1 * (0.5 * h);
    let (f2, a2) = field(&x2);
    let k2 = &a2 * &p2;
    let x3 = axpy(x, &f2, 0.5 * h);
    let p3 = phi + &k2 * (0.5 * h);
    let (f3, a3) = field(&x3);
    let k3 = &a3 * &p3;
    let x4 = axpy(x, &f3, h);
    let p4 = phi + &k3 * h;
    let (f4, a4) = field(&x4);
    let k4 = &a4 * &p4;
    let next: Vec<f64> = (0..x.len())
        .map(|i| x[i] + h / 6.0 * (f1[i] + 2.0 * f2[i] + 2.0 * f3[i] + f4[i]))
        .collect();
    let phi_next = phi + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    (next, phi_next)
}

/// Flow `φᵗ(x)` and its derivative by RK4 on the variational equation.
pub fn variational_flow(case: &SystemCase, x: &[f64], t: f64, steps: usize) -> (Vec<f64>, DMatrix<f64>) {
    let n = x.len();
    let field = |y: &[f64]| (case.dynamics.image(y), case.dynamics.jacobian(y));
    let h = t / steps as f64;
    let mut state = (x.to_vec(), DMatrix::identity(n, n));
    for _ in 0..steps {
        state = rk4_step(&field, &state.0, &state.1, h);
    }
    state
}

/// `log₂` singular values of `P(φᵗx)^{1/2} Dφᵗ(x) P(x)^{-1/2}` for a
/// conformal metric `P = e^{r} p`.
pub fn finite_time_log_singular_values(case: &SystemCase, m: &ConformalMetric, x: &[f64], t: f64, steps: usize) -> Vec<f64> {
    let (y, phi) = variational_flow(case, x, t, steps);
    let dr = m.coeffs.eval(&y).expect("finite") - m.coeffs.eval(x).expect("finite");
    let g = zeta(m.p.as_matrix(), &phi) * (0.5 * dr).exp();
    singular_values_gram(&g).iter().map(|s| s.log2()).collect()
}
