//! Geometry of the cone of symmetric positive definite matrices under the
//! trace metric `<v, w>_p = tr(p⁻¹ v p⁻¹ w)`.
//!
//! Every fractional power, square root and matrix exponential in this module
//! goes through one symmetric eigendecomposition. [`SpdFactor`] caches the
//! decomposition together with `p^{1/2}`, `p^{-1/2}` and `p⁻¹` so that callers
//! evaluating many quantities at the same base point pay for it once.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative eigenvalue floor below which a matrix is rejected as not SPD.
pub const SPD_REL_TOL: f64 = 1e-14;

/// Relative singular value floor below which a matrix counts as singular.
pub const SINGULAR_REL_TOL: f64 = 1e-14;

fn symmetrized(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn check_square_finite(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidInput(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    Ok(())
}

/// A real symmetric matrix; a tangent vector of the SPD cone.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    /// Symmetrizes `m` as `(m + mᵀ)/2`.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        check_square_finite(&m)?;
        Ok(Self(symmetrized(&m)))
    }

    pub fn from_row_slice(n: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: entries.len() });
        }
        Self::new(DMatrix::from_row_slice(n, n, entries))
    }

    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self(&self.0 * s)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    /// Row-major copy of the entries.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.0.row_iter().map(|r| r.iter().copied().collect()).collect()
    }
}

/// A symmetric positive definite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix(DMatrix<f64>);

impl SpdMatrix {
    /// Symmetrizes `m` and rejects it unless every eigenvalue exceeds
    /// `SPD_REL_TOL` times the largest one.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        check_square_finite(&m)?;
        let m = symmetrized(&m);
        let eig = EigenDecomposition::of_symmetric(&m);
        check_spd_spectrum(&eig.values)?;
        Ok(Self(m))
    }

    pub fn from_sym(s: SymMatrix) -> Result<Self> {
        Self::new(s.0)
    }

    pub fn from_row_slice(n: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: entries.len() });
        }
        Self::new(DMatrix::from_row_slice(n, n, entries))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut flat = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: r.len() });
            }
            flat.extend_from_slice(r);
        }
        Self::from_row_slice(n, &flat)
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn as_sym(&self) -> SymMatrix {
        SymMatrix(self.0.clone())
    }

    pub fn scaled(&self, s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::OutOfRange(format!("SPD scale factor must be positive, got {s}")));
        }
        Ok(Self(&self.0 * s))
    }

    pub fn eigen(&self) -> EigenDecomposition {
        EigenDecomposition::of_symmetric(&self.0)
    }

    pub fn factor(&self) -> SpdFactor {
        SpdFactor::new(self)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.0.row_iter().map(|r| r.iter().copied().collect()).collect()
    }
}

fn check_spd_spectrum(values: &DVector<f64>) -> Result<()> {
    let max_eig = values.max();
    let min_eig = values.min();
    if !(max_eig > 0.0) || !(min_eig > SPD_REL_TOL * max_eig) {
        return Err(Error::NotPositiveDefinite { min_eig, max_eig });
    }
    Ok(())
}

/// Symmetric eigendecomposition `V Λ Vᵀ` with eigenvalues sorted descending.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: DVector<f64>,
    /// Columns are the eigenvectors.
    pub vectors: DMatrix<f64>,
}

impl EigenDecomposition {
    /// Decomposes the symmetric part of `m`.
    pub fn of_symmetric(m: &DMatrix<f64>) -> Self {
        let n = m.nrows();
        let sym = symmetrized(m);
        let eig = to_faer(&sym)
            .self_adjoint_eigen(faer::Side::Lower)
            .expect("symmetric eigensolver converges on finite input");
        let (u, s) = (eig.U(), eig.S().column_vector());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
        let values = DVector::from_iterator(n, order.iter().map(|&i| s[i]));
        let vectors = DMatrix::from_fn(n, n, |i, j| u[(i, order[j])]);
        Self { values, vectors }
    }

    /// `V Diag(f(λ_i)) Vᵀ`, symmetrized.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let scaled_cols = {
            let mut vs = self.vectors.clone();
            for (j, mut col) in vs.column_iter_mut().enumerate() {
                col *= f(self.values[j]);
            }
            vs
        };
        symmetrized(&(scaled_cols * self.vectors.transpose()))
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.map_spectrum(|l| l)
    }
}

fn to_faer(m: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Singular values of a square matrix, non-increasing.
pub fn singular_values(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_square_finite(m)?;
    let mut s = to_faer(m)
        .singular_values()
        .map_err(|e| Error::InvalidInput(format!("SVD did not converge: {e:?}")))?;
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// `input = left · Diag(values) · rightᵀ` with `values` non-increasing.
#[derive(Debug, Clone)]
pub struct SingularValueDecomposition {
    pub left: DMatrix<f64>,
    pub values: DVector<f64>,
    pub right: DMatrix<f64>,
}

impl SingularValueDecomposition {
    pub fn of(m: &DMatrix<f64>) -> Result<Self> {
        check_square_finite(m)?;
        let n = m.nrows();
        let svd = to_faer(m).svd().map_err(|e| Error::InvalidInput(format!("SVD did not converge: {e:?}")))?;
        let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
        let values = DVector::from_iterator(n, order.iter().map(|&i| s[i]));
        let left = DMatrix::from_fn(n, n, |i, j| u[(i, order[j])]);
        let right = DMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
        Ok(Self { left, values, right })
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut ls = self.left.clone();
        for (j, mut col) in ls.column_iter_mut().enumerate() {
            col *= self.values[j];
        }
        ls * self.right.transpose()
    }
}

/// Cached factorization of an SPD base point.
#[derive(Debug, Clone)]
pub struct SpdFactor {
    pub eigen: EigenDecomposition,
    pub sqrt: DMatrix<f64>,
    pub inv_sqrt: DMatrix<f64>,
    pub inv: DMatrix<f64>,
}

impl SpdFactor {
    pub fn new(p: &SpdMatrix) -> Self {
        let eigen = p.eigen();
        let sqrt = eigen.map_spectrum(f64::sqrt);
        let inv_sqrt = eigen.map_spectrum(|l| 1.0 / l.sqrt());
        let inv = eigen.map_spectrum(|l| 1.0 / l);
        Self { eigen, sqrt, inv_sqrt, inv }
    }

    pub fn dim(&self) -> usize {
        self.eigen.values.len()
    }

    /// Solves `p^{1/2} X + X p^{1/2} = h` in the eigenbasis of `p`.
    pub fn lyapunov_sqrt_solve(&self, h: &DMatrix<f64>) -> DMatrix<f64> {
        let v = &self.eigen.vectors;
        let mut ht = v.transpose() * h * v;
        let roots: Vec<f64> = self.eigen.values.iter().map(|l| l.sqrt()).collect();
        let n = roots.len();
        for i in 0..n {
            for j in 0..n {
                ht[(i, j)] /= roots[i] + roots[j];
            }
        }
        v * ht * v.transpose()
    }

    /// `tr(p⁻¹ v p⁻¹ w)`.
    pub fn inner(&self, v: &DMatrix<f64>, w: &DMatrix<f64>) -> f64 {
        let a = &self.inv * v;
        let b = &self.inv * w;
        a.component_mul(&b.transpose()).sum()
    }
}

/// `p^t` through the eigendecomposition of `p`.
pub fn spd_power(p: &SpdMatrix, t: f64) -> Result<SpdMatrix> {
    if !t.is_finite() {
        return Err(Error::InvalidInput(format!("exponent must be finite, got {t}")));
    }
    SpdMatrix::new(p.eigen().map_spectrum(|l| l.powf(t)))
}

/// Matrix exponential of a symmetric matrix.
pub fn sym_exp(v: &DMatrix<f64>) -> DMatrix<f64> {
    EigenDecomposition::of_symmetric(v).map_spectrum(f64::exp)
}

/// The point `p #_θ q = p^{1/2} [p^{-1/2} q p^{-1/2}]^θ p^{1/2}` on the
/// geodesic from `p` to `q`.
pub fn geodesic_point(p: &SpdMatrix, q: &SpdMatrix, theta: f64) -> Result<SpdMatrix> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::OutOfRange(format!("geodesic parameter must lie in [0, 1], got {theta}")));
    }
    check_same_dim(p.dim(), q.dim())?;
    // In the eigenbasis V of p the middle factor is B Bᵀ with
    // B = D^{-1/2} Vᵀ q^{1/2}. Its small eigenvalues come out of an SVD
    // of B with far better relative accuracy than from B Bᵀ itself.
    let eig = p.eigen();
    let n = eig.values.len();
    let root: Vec<f64> = eig.values.iter().map(|v| v.sqrt()).collect();
    let q_root = q.eigen().map_spectrum(f64::sqrt);
    let rotated = eig.vectors.transpose() * q_root;
    let b = DMatrix::from_fn(n, n, |i, j| rotated[(i, j)] / root[i]);
    let svd = SingularValueDecomposition::of(&b)?;
    // p #_θ q = V G Gᵀ Vᵀ with G = D^{1/2} U Σ^θ
    let g = DMatrix::from_fn(n, n, |i, j| root[i] * svd.left[(i, j)] * svd.values[j].powf(theta));
    let vg = &eig.vectors * g;
    SpdMatrix::new(&vg * vg.transpose())
}

/// The geodesic `γ_v(θ) = p^{1/2} exp(θ p^{-1/2} v p^{-1/2}) p^{1/2}` leaving
/// `p` with velocity `v`.
pub fn geodesic_from_velocity(p: &SpdMatrix, v: &SymMatrix, theta: f64) -> Result<SpdMatrix> {
    if !(theta >= 0.0 && theta.is_finite()) {
        return Err(Error::OutOfRange(format!("geodesic time must be finite and >= 0, got {theta}")));
    }
    check_same_dim(p.dim(), v.dim())?;
    geodesic_from_velocity_factored(&p.factor(), v.as_matrix(), theta)
}

pub(crate) fn geodesic_from_velocity_factored(
    f: &SpdFactor,
    v: &DMatrix<f64>,
    theta: f64,
) -> Result<SpdMatrix> {
    let inner = (&f.inv_sqrt * v * &f.inv_sqrt) * theta;
    SpdMatrix::new(&f.sqrt * sym_exp(&inner) * &f.sqrt)
}

/// The trace metric `<v, w>_p = tr(p⁻¹ v p⁻¹ w)`.
pub fn trace_inner(p: &SpdMatrix, v: &SymMatrix, w: &SymMatrix) -> Result<f64> {
    check_same_dim(p.dim(), v.dim())?;
    check_same_dim(p.dim(), w.dim())?;
    Ok(p.factor().inner(v.as_matrix(), w.as_matrix()))
}

/// Solves `p^{1/2} X + X p^{1/2} = h`.
pub fn lyapunov_sqrt_solve(p: &SpdMatrix, h: &SymMatrix) -> Result<SymMatrix> {
    check_same_dim(p.dim(), h.dim())?;
    SymMatrix::new(p.factor().lyapunov_sqrt_solve(h.as_matrix()))
}

/// Standard basis of symmetric matrices: `E_kk` for each k, then
/// `E_kl + E_lk` for k < l in lexicographic order.
pub fn standard_sym_basis(n: usize) -> Vec<DMatrix<f64>> {
    let mut basis = Vec::with_capacity(n * (n + 1) / 2);
    for k in 0..n {
        let mut e = DMatrix::zeros(n, n);
        e[(k, k)] = 1.0;
        basis.push(e);
    }
    for k in 0..n {
        for l in (k + 1)..n {
            let mut e = DMatrix::zeros(n, n);
            e[(k, l)] = 1.0;
            e[(l, k)] = 1.0;
            basis.push(e);
        }
    }
    basis
}

/// Orthonormal basis of the tangent space at `p` obtained by Gram–Schmidt
/// on [`standard_sym_basis`].
pub fn onb_at(p: &SpdMatrix) -> Vec<SymMatrix> {
    onb_factored(&p.factor()).into_iter().map(SymMatrix).collect()
}

pub(crate) fn onb_factored(f: &SpdFactor) -> Vec<DMatrix<f64>> {
    let n = f.dim();
    let mut out: Vec<DMatrix<f64>> = Vec::with_capacity(n * (n + 1) / 2);
    for mut e in standard_sym_basis(n) {
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for q in &out {
                let c = f.inner(&e, q);
                e -= q * c;
            }
        }
        let norm = f.inner(&e, &e).sqrt();
        e /= norm;
        out.push(symmetrized(&e));
    }
    out
}

/// Base-2 logarithms of the singular values of `g`, non-increasing.
pub fn log_singular_vector(g: &DMatrix<f64>) -> Result<DVector<f64>> {
    let svd = SingularValueDecomposition::of(g)?;
    let n = svd.values.len();
    if n == 0 {
        return Ok(DVector::zeros(0));
    }
    let largest = svd.values[0];
    let smallest = svd.values[n - 1];
    if !(smallest > SINGULAR_REL_TOL * largest) {
        return Err(Error::SingularMatrix(format!(
            "smallest singular value {smallest:e} vs largest {largest:e}"
        )));
    }
    Ok(svd.values.map(f64::log2))
}

fn check_same_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(v))
    }

    #[test]
    fn power_examples() {
        let i = SpdMatrix::identity(3);
        assert!(rel_diff(spd_power(&i, 0.5).unwrap().as_matrix(), &DMatrix::identity(3, 3)) < 1e-15);
        let p = SpdMatrix::new(diag(&[4.0, 9.0])).unwrap();
        assert!(rel_diff(spd_power(&p, 0.5).unwrap().as_matrix(), &diag(&[2.0, 3.0])) < 1e-15);
        let p = SpdMatrix::new(diag(&[4.0])).unwrap();
        assert!((spd_power(&p, -0.5).unwrap().as_matrix()[(0, 0)] - 0.5).abs() < 1e-15);
        assert!(spd_power(&p, f64::NAN).is_err());
    }

    #[test]
    fn rejects_non_spd_and_non_finite() {
        assert!(matches!(
            SpdMatrix::new(diag(&[1.0, -1.0])),
            Err(Error::NotPositiveDefinite { .. })
        ));
        assert!(SpdMatrix::new(diag(&[1.0, 1e-16])).is_err());
        assert!(SpdMatrix::new(diag(&[1.0, f64::INFINITY])).is_err());
        assert!(SymMatrix::new(DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn geodesic_examples() {
        let p = SpdMatrix::from_row_slice(2, &[2.0, 0.5, 0.5, 1.0]).unwrap();
        let q = SpdMatrix::from_row_slice(2, &[1.0, -0.2, -0.2, 3.0]).unwrap();
        assert!(rel_diff(geodesic_point(&p, &q, 0.0).unwrap().as_matrix(), p.as_matrix()) < 1e-14);
        let i = SpdMatrix::identity(2);
        let four = SpdMatrix::new(diag(&[4.0, 4.0])).unwrap();
        let mid = geodesic_point(&i, &four, 0.5).unwrap();
        assert!(rel_diff(mid.as_matrix(), &diag(&[2.0, 2.0])) < 1e-14);
        let pinv = spd_power(&p, -1.0).unwrap();
        let mid = geodesic_point(&p, &pinv, 0.5).unwrap();
        assert!(rel_diff(mid.as_matrix(), &DMatrix::identity(2, 2)) < 1e-13);
        assert!(matches!(geodesic_point(&p, &q, 1.5), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn velocity_geodesic_examples() {
        let p = SpdMatrix::from_row_slice(2, &[2.0, 0.5, 0.5, 1.0]).unwrap();
        let zero = SymMatrix::zeros(2);
        let g = geodesic_from_velocity(&p, &zero, 0.7).unwrap();
        assert!(rel_diff(g.as_matrix(), p.as_matrix()) < 1e-14);

        let v = SymMatrix::new(diag(&[1.0, -1.0])).unwrap();
        let g = geodesic_from_velocity(&SpdMatrix::identity(2), &v, 1.0).unwrap();
        let e = std::f64::consts::E;
        assert!(rel_diff(g.as_matrix(), &diag(&[e, 1.0 / e])) < 1e-14);
        assert!(geodesic_from_velocity(&p, &v, -1.0).is_err());
    }

    #[test]
    fn trace_inner_examples() {
        let v = SymMatrix::from_row_slice(2, &[1.0, 2.0, 2.0, -1.0]).unwrap();
        let w = SymMatrix::from_row_slice(2, &[0.5, 0.0, 0.0, 3.0]).unwrap();
        let i = SpdMatrix::identity(2);
        let expected = (v.as_matrix() * w.as_matrix()).trace();
        assert!((trace_inner(&i, &v, &w).unwrap() - expected).abs() < 1e-14);

        let p = SpdMatrix::from_row_slice(3, &[3.0, 0.1, 0.2, 0.1, 2.0, 0.3, 0.2, 0.3, 1.0]).unwrap();
        let ps = p.as_sym();
        assert!((trace_inner(&p, &ps, &ps).unwrap() - 3.0).abs() < 1e-13);

        let p1 = SpdMatrix::new(diag(&[2.0])).unwrap();
        let one = SymMatrix::identity(1);
        assert!((trace_inner(&p1, &one, &one).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn lyapunov_examples() {
        let h = SymMatrix::from_row_slice(2, &[1.0, 2.0, 2.0, -3.0]).unwrap();
        let x = lyapunov_sqrt_solve(&SpdMatrix::identity(2), &h).unwrap();
        assert!(rel_diff(x.as_matrix(), &(h.as_matrix() * 0.5)) < 1e-15);
        let four = SpdMatrix::new(diag(&[4.0, 4.0])).unwrap();
        let x = lyapunov_sqrt_solve(&four, &h).unwrap();
        assert!(rel_diff(x.as_matrix(), &(h.as_matrix() * 0.25)) < 1e-15);

        let p = SpdMatrix::new(diag(&[1.0, 4.0])).unwrap();
        let h = SymMatrix::from_row_slice(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let x = lyapunov_sqrt_solve(&p, &h).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[0.0, 1.0 / 3.0, 1.0 / 3.0, 0.0]);
        assert!(rel_diff(x.as_matrix(), &expected) < 1e-15);
        // residual substitution
        let s = diag(&[1.0, 2.0]);
        let res = &s * x.as_matrix() + x.as_matrix() * &s - h.as_matrix();
        assert!(res.norm() < 1e-15);
    }

    #[test]
    fn onb_examples() {
        let basis = onb_at(&SpdMatrix::identity(3));
        let std = standard_sym_basis(3);
        assert_eq!(basis.len(), 6);
        for (b, s) in basis.iter().zip(&std) {
            let expected = if s.iter().filter(|v| **v != 0.0).count() == 1 {
                s.clone()
            } else {
                s / 2f64.sqrt()
            };
            assert!(rel_diff(b.as_matrix(), &expected) < 1e-15);
        }
        let four = SpdMatrix::new(diag(&[4.0])).unwrap();
        let b = onb_at(&four);
        assert_eq!(b.len(), 1);
        assert!((b[0].as_matrix()[(0, 0)] - 4.0).abs() < 1e-14);
    }

    #[test]
    fn onb_is_orthonormal_for_skewed_p() {
        let p = SpdMatrix::from_row_slice(
            3,
            &[5.0, 1.0, -0.5, 1.0, 0.4, 0.05, -0.5, 0.05, 3.0],
        )
        .unwrap();
        let basis = onb_at(&p);
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let g = trace_inner(&p, a, b).unwrap();
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((g - target).abs() < 1e-10, "gram[{i}][{j}] = {g}");
            }
        }
    }

    #[test]
    fn log_singular_examples() {
        let v = log_singular_vector(&DMatrix::identity(3, 3)).unwrap();
        assert!(v.iter().all(|x| x.abs() < 1e-15));
        let v = log_singular_vector(&diag(&[4.0, 0.5])).unwrap();
        assert!((v[0] - 2.0).abs() < 1e-14 && (v[1] + 1.0).abs() < 1e-14);
        let henon_origin = DMatrix::from_row_slice(2, 2, &[0.0, 0.3, 1.0, 0.0]);
        let v = log_singular_vector(&henon_origin).unwrap();
        assert!(v[0].abs() < 1e-14 && (v[1] - 0.3f64.log2()).abs() < 1e-14);
        let singular = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(log_singular_vector(&singular), Err(Error::SingularMatrix(_))));
    }

    #[test]
    fn decompositions_reconstruct() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.5, -1.0, 0.3, 2.0, 0.7, 0.1, -2.0]);
        let svd = SingularValueDecomposition::of(&m).unwrap();
        assert!(rel_diff(&svd.reconstruct(), &m) < 1e-12);
        assert!(svd.values.iter().zip(svd.values.iter().skip(1)).all(|(a, b)| a >= b));
        let s = symmetrized(&m);
        let eig = EigenDecomposition::of_symmetric(&s);
        assert!(rel_diff(&eig.reconstruct(), &s) < 1e-12);
        let vvt = &eig.vectors * eig.vectors.transpose();
        assert!((vvt - DMatrix::<f64>::identity(3, 3)).norm() < 1e-12);
    }
}
