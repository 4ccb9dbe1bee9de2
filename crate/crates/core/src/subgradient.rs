//! Riemannian subgradients of the objective at `(a, p)`, given the inner
//! maximizer `(x*, k*)`.
//!
//! The value at a fixed `(x*, k*)` splits into a part depending only on `a`
//! and a part depending only on `p`; each is differentiated on its own.

use std::f64::consts::LN_2;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::metric::ConformalMetric;
use crate::objective::InnerMaxResult;
use crate::poly::PolyBasis;
use crate::spd::{onb_factored, EigenDecomposition, SingularValueDecomposition, SpdFactor, SpdMatrix, SymMatrix};
use crate::systems::SystemCase;

/// A tangent vector `(s₁, s₂)` at `(a, p)` with its product norm.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub s1: Vec<f64>,
    pub s2: SymMatrix,
    pub norm: f64,
}

impl TangentVector {
    pub fn new(s1: Vec<f64>, s2: SymMatrix, p: &SpdMatrix) -> Self {
        let norm = product_norm(&s1, s2.as_matrix(), &p.factor());
        Self { s1, s2, norm }
    }

    pub fn zero(n_coeffs: usize, n: usize) -> Self {
        Self { s1: vec![0.0; n_coeffs], s2: SymMatrix::zeros(n), norm: 0.0 }
    }

    /// `<s₁, v₁> + <s₂, v₂>_p`.
    pub fn inner(&self, v1: &[f64], v2: &SymMatrix, p: &SpdMatrix) -> f64 {
        let e: f64 = self.s1.iter().zip(v1).map(|(a, b)| a * b).sum();
        e + p.factor().inner(self.s2.as_matrix(), v2.as_matrix())
    }
}

pub(crate) fn product_norm(s1: &[f64], s2: &DMatrix<f64>, f: &SpdFactor) -> f64 {
    let e: f64 = s1.iter().map(|v| v * v).sum();
    (e + f.inner(s2, s2).max(0.0)).sqrt()
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k > n {
        return Err(Error::OutOfRange(format!("k* = {k} exceeds dimension {n}")));
    }
    Ok(())
}

/// `(k*/(2 ln 2)) · [m(φ(x*)) − m(x*)]`.
pub fn discrete_linear_subgrad(basis: &PolyBasis, x: &[f64], fx: &[f64], k: usize) -> Result<Vec<f64>> {
    check_k(k, basis.n_vars())?;
    let mx = basis.monomial_vector(x)?;
    let mfx = basis.monomial_vector(fx)?;
    let c = k as f64 / (2.0 * LN_2);
    Ok(mfx.iter().zip(&mx).map(|(a, b)| c * (a - b)).collect())
}

/// `k* · (∇m(x*) · F(x*))`.
pub fn continuous_linear_subgrad(basis: &PolyBasis, x: &[f64], fx: &[f64], k: usize) -> Result<Vec<f64>> {
    check_k(k, basis.n_vars())?;
    let v = basis.orbital_derivative_vector(x, fx)?;
    Ok(v.into_iter().map(|c| k as f64 * c).collect())
}

fn check_operands(p: &SpdMatrix, a: &DMatrix<f64>, k: usize) -> Result<()> {
    let n = p.dim();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: a.nrows() });
    }
    check_k(k, n)
}

/// `Dζ(p)h = (X_L A − X X_L) p^{-1/2}` with `ζ(p) = p^{1/2} A p^{-1/2}`,
/// `X = ζ(p)` and `p^{1/2} X_L + X_L p^{1/2} = h`.
pub fn zeta_derivative(f: &SpdFactor, a: &DMatrix<f64>, h: &DMatrix<f64>) -> DMatrix<f64> {
    let x = &f.sqrt * a * &f.inv_sqrt;
    zeta_derivative_with(f, a, &x, h)
}

fn zeta_derivative_with(f: &SpdFactor, a: &DMatrix<f64>, x: &DMatrix<f64>, h: &DMatrix<f64>) -> DMatrix<f64> {
    let xl = f.lyapunov_sqrt_solve(h);
    (&xl * a - x * &xl) * &f.inv_sqrt
}

/// `Dζ̂(p)v` for `ζ̂(p) = p^{1/2} A p^{-1/2} + p^{-1/2} Aᵀ p^{1/2}`.
pub fn zeta_hat_derivative(f: &SpdFactor, a: &DMatrix<f64>, v: &DMatrix<f64>) -> DMatrix<f64> {
    let x = &f.sqrt * a * &f.inv_sqrt;
    zeta_hat_derivative_with(f, a, &x, v)
}

fn zeta_hat_derivative_with(f: &SpdFactor, a: &DMatrix<f64>, x: &DMatrix<f64>, v: &DMatrix<f64>) -> DMatrix<f64> {
    let y = f.lyapunov_sqrt_solve(v);
    let d = (&y * a - x * &y) * &f.inv_sqrt;
    let e = &f.inv_sqrt * (a.transpose() * &y - &y * x.transpose());
    d + e
}

/// `Σᵢ ℓ(eᵢ) eᵢ` over the orthonormal basis of `T_p` from Gram–Schmidt.
fn riesz(f: &SpdFactor, ell: impl Fn(&DMatrix<f64>) -> f64) -> DMatrix<f64> {
    let n = f.dim();
    let mut s2 = DMatrix::zeros(n, n);
    for e in onb_factored(f) {
        let c = ell(&e);
        s2 += e * c;
    }
    (&s2 + s2.transpose()) * 0.5
}

fn frobenius_pairing(s: &DMatrix<f64>, d: &DMatrix<f64>) -> f64 {
    s.component_mul(d).sum()
}

/// `(1/ln 2) Ũ Diag(1/α₁, …, 1/α_k, 0, …) Ṽᵀ` for `X = Ũ Σ Ṽᵀ`.
pub fn log_singular_gradient(x: &DMatrix<f64>, k: usize) -> Result<DMatrix<f64>> {
    let n = x.nrows();
    let svd = SingularValueDecomposition::of(x)?;
    let mut s = DMatrix::zeros(n, n);
    for i in 0..k {
        let alpha = svd.values[i];
        if !(alpha > 0.0) {
            return Err(Error::SingularMatrix("zero singular value among the leading k*".into()));
        }
        s += svd.left.column(i) * svd.right.column(i).transpose() / alpha;
    }
    Ok(s / LN_2)
}

/// `U Diag(1, …, 1, 0, …) Uᵀ` from the eigenvectors of symmetric `h`.
pub fn top_eigenprojector(h: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let n = h.nrows();
    let e = EigenDecomposition::of_symmetric(h);
    let mut s = DMatrix::zeros(n, n);
    for i in 0..k {
        s += e.vectors.column(i) * e.vectors.column(i).transpose();
    }
    s
}

/// The `p`-part of a subgradient for a map with Jacobian `A` at `x*`.
pub fn discrete_matrix_subgrad(p: &SpdMatrix, a: &DMatrix<f64>, k: usize) -> Result<SymMatrix> {
    check_operands(p, a, k)?;
    let n = p.dim();
    let f = p.factor();
    let x = &f.sqrt * a * &f.inv_sqrt;
    let sv = SingularValueDecomposition::of(&x)?;
    if n > 0 && !(sv.values[n - 1] > crate::spd::SINGULAR_REL_TOL * sv.values[0]) {
        return Err(Error::SingularMatrix("Jacobian at the maximizer is singular".into()));
    }
    if k == 0 {
        return Ok(SymMatrix::zeros(n));
    }
    let s = log_singular_gradient(&x, k)?;
    SymMatrix::new(riesz(&f, |e| frobenius_pairing(&s, &zeta_derivative_with(&f, a, &x, e))))
}

/// The `p`-part of a subgradient for a flow with Jacobian `A` at `x*`.
pub fn continuous_matrix_subgrad(p: &SpdMatrix, a: &DMatrix<f64>, k: usize) -> Result<SymMatrix> {
    check_operands(p, a, k)?;
    let n = p.dim();
    if k == 0 {
        return Ok(SymMatrix::zeros(n));
    }
    let f = p.factor();
    let x = &f.sqrt * a * &f.inv_sqrt;
    let h = &x + x.transpose();
    let s = top_eigenprojector(&h, k);
    SymMatrix::new(riesz(&f, |e| frobenius_pairing(&s, &zeta_hat_derivative_with(&f, a, &x, e))))
}

/// A subgradient of the objective at `metric`, from the inner maximizer.
/// For flows this is a subgradient of the value before division by `2 ln 2`.
pub fn full_subgradient(case: &SystemCase, metric: &ConformalMetric, inner: &InnerMaxResult) -> Result<TangentVector> {
    let n = case.dim();
    let basis = metric.basis();
    let k = inner.k_star;
    if k == 0 {
        return Ok(TangentVector::zero(basis.len(), n));
    }
    let x = &inner.x_star;
    let image = case.dynamics.image(x);
    let a = case.dynamics.jacobian(x);
    let (s1, s2) = if case.is_discrete() {
        (discrete_linear_subgrad(basis, x, &image, k)?, discrete_matrix_subgrad(&metric.p, &a, k)?)
    } else {
        (continuous_linear_subgrad(basis, x, &image, k)?, continuous_matrix_subgrad(&metric.p, &a, k)?)
    };
    Ok(TangentVector::new(s1, s2, &metric.p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> DMatrix<f64> {
        let n = rows.len();
        DMatrix::from_row_slice(n, n, &rows.concat())
    }

    #[test]
    fn k_zero_gives_zero() {
        let b = PolyBasis::new(2, 2, true).unwrap();
        assert!(discrete_linear_subgrad(&b, &[0.3, 0.1], &[1.0, 2.0], 0).unwrap().iter().all(|&v| v == 0.0));
        assert!(continuous_linear_subgrad(&b, &[0.3, 0.1], &[1.0, 2.0], 0).unwrap().iter().all(|&v| v == 0.0));
        let p = SpdMatrix::from_row_slice(2, &[2.0, 0.3, 0.3, 1.0]).unwrap();
        let a = m(&[&[1.0, 2.0], &[0.5, -1.0]]);
        assert_eq!(discrete_matrix_subgrad(&p, &a, 0).unwrap().frobenius_norm(), 0.0);
        assert_eq!(continuous_matrix_subgrad(&p, &a, 0).unwrap().frobenius_norm(), 0.0);
    }

    #[test]
    fn linear_parts_follow_monomial_rows() {
        let b = PolyBasis::new(2, 2, true).unwrap();
        let (x, fx) = ([0.5, -1.0], [2.0, 3.0]);
        let k = 2usize;
        let got = discrete_linear_subgrad(&b, &x, &fx, k).unwrap();
        let c = k as f64 / (2.0 * LN_2);
        let cases: [([u32; 2], f64); 6] = [
            ([0, 0], 0.0),
            ([1, 0], fx[0] - x[0]),
            ([0, 1], fx[1] - x[1]),
            ([1, 1], fx[0] * fx[1] - x[0] * x[1]),
            ([2, 0], fx[0] * fx[0] - x[0] * x[0]),
            ([0, 2], fx[1] * fx[1] - x[1] * x[1]),
        ];
        for (e, want) in cases {
            assert!((got[b.index_of(&e).unwrap()] - c * want).abs() < 1e-14);
        }
        let got = continuous_linear_subgrad(&b, &x, &fx, 1).unwrap();
        let cases: [([u32; 2], f64); 6] = [
            ([0, 0], 0.0),
            ([1, 0], fx[0]),
            ([0, 1], fx[1]),
            ([1, 1], fx[0] * x[1] + x[0] * fx[1]),
            ([2, 0], 2.0 * x[0] * fx[0]),
            ([0, 2], 2.0 * x[1] * fx[1]),
        ];
        for (e, want) in cases {
            assert!((got[b.index_of(&e).unwrap()] - want).abs() < 1e-14);
        }
        let fixed = discrete_linear_subgrad(&b, &x, &x, 1).unwrap();
        assert!(fixed.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identity_base_point_with_symmetric_jacobian_is_stationary() {
        let p = SpdMatrix::identity(3);
        let a = m(&[&[3.0, 0.5, 0.1], &[0.5, 2.0, -0.2], &[0.1, -0.2, 0.7]]);
        for k in 1..=3 {
            assert!(discrete_matrix_subgrad(&p, &a, k).unwrap().frobenius_norm() < 1e-13);
            assert!(continuous_matrix_subgrad(&p, &a, k).unwrap().frobenius_norm() < 1e-13);
        }
    }

    #[test]
    fn singular_jacobian_is_rejected() {
        let p = SpdMatrix::identity(2);
        let a = m(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(discrete_matrix_subgrad(&p, &a, 1).is_err());
    }
}
