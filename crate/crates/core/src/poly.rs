//! Multivariate polynomials of bounded total degree, stored as coefficient
//! vectors over a fixed monomial basis.
//!
//! Monomials are ordered graded-lexicographically: ascending total degree,
//! and within one degree by descending exponent of the first variable, then
//! of the second, and so on. For two variables and degree 2 that is
//! `1, x₁, x₂, x₁², x₁x₂, x₂²`. The ordering is serialized with every stored
//! coefficient vector under the tag [`ORDERING_TAG`].

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ORDERING_TAG: &str = "grlex-v1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyBasis {
    n_vars: usize,
    degree: usize,
    include_constant: bool,
    /// Flattened exponent tuples, `n_vars` entries per monomial.
    exponents: Vec<u32>,
}

/// Serializable description of a [`PolyBasis`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisDescriptor {
    pub n_vars: usize,
    pub degree: usize,
    pub include_constant: bool,
    pub ordering: String,
}

fn push_exponents_with_total(n: usize, total: u32, prefix: &mut Vec<u32>, out: &mut Vec<u32>) {
    if prefix.len() + 1 == n {
        out.extend_from_slice(prefix);
        out.push(total);
        return;
    }
    for e in (0..=total).rev() {
        prefix.push(e);
        push_exponents_with_total(n, total - e, prefix, out);
        prefix.pop();
    }
}

impl PolyBasis {
    pub fn new(n_vars: usize, degree: usize, include_constant: bool) -> Result<Self> {
        if n_vars == 0 {
            return Err(Error::InvalidInput("polynomial basis needs at least one variable".into()));
        }
        let mut exponents = Vec::new();
        let start = if include_constant { 0 } else { 1 };
        for total in start..=degree as u32 {
            push_exponents_with_total(n_vars, total, &mut Vec::with_capacity(n_vars), &mut exponents);
        }
        Ok(Self { n_vars, degree, include_constant, exponents })
    }

    pub fn from_descriptor(d: &BasisDescriptor) -> Result<Self> {
        if d.ordering != ORDERING_TAG {
            return Err(Error::Config(format!(
                "unsupported monomial ordering {:?}, expected {ORDERING_TAG:?}",
                d.ordering
            )));
        }
        Self::new(d.n_vars, d.degree, d.include_constant)
    }

    pub fn descriptor(&self) -> BasisDescriptor {
        BasisDescriptor {
            n_vars: self.n_vars,
            degree: self.degree,
            include_constant: self.include_constant,
            ordering: ORDERING_TAG.to_string(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn include_constant(&self) -> bool {
        self.include_constant
    }

    pub fn len(&self) -> usize {
        self.exponents.len() / self.n_vars
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn monomial(&self, i: usize) -> &[u32] {
        &self.exponents[i * self.n_vars..(i + 1) * self.n_vars]
    }

    pub fn monomials(&self) -> impl Iterator<Item = &[u32]> {
        self.exponents.chunks_exact(self.n_vars)
    }

    /// Position of the monomial with the given exponents, if present.
    pub fn index_of(&self, exps: &[u32]) -> Option<usize> {
        self.monomials().position(|m| m == exps)
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_vars {
            return Err(Error::DimensionMismatch { expected: self.n_vars, got: x.len() });
        }
        Ok(())
    }

    /// Scratch length needed by [`PolyBasis::fill_powers`].
    pub fn powers_len(&self) -> usize {
        self.n_vars * (self.degree + 1)
    }

    /// Writes `x_i^k` for `k = 0..=degree` at `powers[i * (degree + 1) + k]`.
    pub fn fill_powers(&self, x: &[f64], powers: &mut [f64]) {
        let stride = self.degree + 1;
        for (i, &xi) in x.iter().enumerate() {
            let row = &mut powers[i * stride..(i + 1) * stride];
            row[0] = 1.0;
            for k in 1..stride {
                row[k] = row[k - 1] * xi;
            }
        }
    }

    #[inline]
    fn monomial_from_powers(&self, m: &[u32], powers: &[f64]) -> f64 {
        let stride = self.degree + 1;
        m.iter().enumerate().map(|(i, &e)| powers[i * stride + e as usize]).product()
    }

    /// `Σ a_m x^m` given precomputed powers of `x`.
    #[inline]
    pub fn eval_with_powers(&self, a: &[f64], powers: &[f64]) -> f64 {
        self.monomials()
            .zip(a)
            .map(|(m, &c)| c * self.monomial_from_powers(m, powers))
            .sum()
    }

    /// Value of every basis monomial at `x`.
    pub fn monomial_vector(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        let mut powers = vec![0.0; self.powers_len()];
        self.fill_powers(x, &mut powers);
        Ok(self.monomials().map(|m| self.monomial_from_powers(m, &powers)).collect())
    }

    /// `∂(x^m)/∂x_var` for monomial `m`, from precomputed powers.
    fn monomial_partial(&self, m: &[u32], var: usize, powers: &[f64]) -> f64 {
        let e = m[var];
        if e == 0 {
            return 0.0;
        }
        let stride = self.degree + 1;
        let mut v = e as f64;
        for (i, &ei) in m.iter().enumerate() {
            let k = if i == var { ei - 1 } else { ei };
            v *= powers[i * stride + k as usize];
        }
        v
    }

    /// Vector `w` with `<a, w> = ∇r_a(x) · fx` for every coefficient vector `a`.
    pub fn orbital_derivative_vector(&self, x: &[f64], fx: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        self.check_point(fx)?;
        let mut powers = vec![0.0; self.powers_len()];
        self.fill_powers(x, &mut powers);
        Ok(self
            .monomials()
            .map(|m| (0..self.n_vars).map(|i| self.monomial_partial(m, i, &powers) * fx[i]).sum())
            .collect())
    }

    /// `∇r_a(x) · fx` given precomputed powers of `x`.
    #[inline]
    pub fn orbital_with_powers(&self, a: &[f64], powers: &[f64], fx: &[f64]) -> f64 {
        self.monomials()
            .zip(a)
            .map(|(m, &c)| {
                if c == 0.0 {
                    return 0.0;
                }
                let d: f64 = (0..self.n_vars).map(|i| self.monomial_partial(m, i, powers) * fx[i]).sum();
                c * d
            })
            .sum()
    }
}

/// A polynomial stored as its nonzero terms, each term as offsets into the
/// power table of [`PolyBasis::fill_powers`].
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct CompiledPoly {
    n_vars: usize,
    coeffs: Vec<f64>,
    offsets: Vec<usize>,
}

impl CompiledPoly {
    fn from_terms(basis: &PolyBasis, terms: impl Iterator<Item = (f64, Vec<u32>)>) -> Self {
        let stride = basis.degree + 1;
        let mut coeffs = Vec::new();
        let mut offsets = Vec::new();
        for (c, m) in terms {
            if c == 0.0 {
                continue;
            }
            coeffs.push(c);
            offsets.extend(m.iter().enumerate().map(|(i, &e)| i * stride + e as usize));
        }
        Self { n_vars: basis.n_vars, coeffs, offsets }
    }

    /// `r_a` itself.
    pub(crate) fn new(basis: &PolyBasis, a: &[f64]) -> Self {
        Self::from_terms(basis, basis.monomials().zip(a).map(|(m, &c)| (c, m.to_vec())))
    }

    /// `∂r_a/∂x_i` for each `i`.
    pub(crate) fn gradient(basis: &PolyBasis, a: &[f64]) -> Vec<Self> {
        (0..basis.n_vars)
            .map(|var| {
                Self::from_terms(
                    basis,
                    basis.monomials().zip(a).filter(|(m, _)| m[var] > 0).map(|(m, &c)| {
                        let mut d = m.to_vec();
                        d[var] -= 1;
                        (c * m[var] as f64, d)
                    }),
                )
            })
            .collect()
    }

    #[inline]
    pub(crate) fn eval(&self, powers: &[f64]) -> f64 {
        let terms = self.coeffs.iter();
        match self.n_vars {
            2 => terms.zip(self.offsets.chunks_exact(2)).fold(0.0, |acc, (&c, o)| acc + c * powers[o[0]] * powers[o[1]]),
            3 => terms
                .zip(self.offsets.chunks_exact(3))
                .fold(0.0, |acc, (&c, o)| acc + c * powers[o[0]] * powers[o[1]] * powers[o[2]]),
            _ => self.eval_generic(powers),
        }
    }

    fn eval_generic(&self, powers: &[f64]) -> f64 {
        let n = self.n_vars;
        let mut acc = 0.0;
        for (t, &c) in self.coeffs.iter().enumerate() {
            let mut v = c;
            for &o in &self.offsets[t * n..(t + 1) * n] {
                v *= powers[o];
            }
            acc += v;
        }
        acc
    }
}

/// Coefficients `a` of the polynomial `r_a` over a shared basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyCoeffs {
    basis: Arc<PolyBasis>,
    a: Vec<f64>,
}

impl PolyCoeffs {
    pub fn new(basis: Arc<PolyBasis>, a: Vec<f64>) -> Result<Self> {
        if a.len() != basis.len() {
            return Err(Error::DimensionMismatch { expected: basis.len(), got: a.len() });
        }
        if a.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("polynomial coefficients must be finite".into()));
        }
        Ok(Self { basis, a })
    }

    pub fn zeros(basis: Arc<PolyBasis>) -> Self {
        let a = vec![0.0; basis.len()];
        Self { basis, a }
    }

    pub fn basis(&self) -> &Arc<PolyBasis> {
        &self.basis
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.a
    }

    pub fn into_coefficients(self) -> Vec<f64> {
        self.a
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().all(|&c| c == 0.0)
    }

    /// `r_a(x)`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.basis.check_point(x)?;
        let mut powers = vec![0.0; self.basis.powers_len()];
        self.basis.fill_powers(x, &mut powers);
        Ok(self.basis.eval_with_powers(&self.a, &powers))
    }

    /// Spatial gradient `∇r_a(x)`.
    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.basis.check_point(x)?;
        let mut powers = vec![0.0; self.basis.powers_len()];
        self.basis.fill_powers(x, &mut powers);
        Ok((0..self.basis.n_vars)
            .map(|i| {
                self.basis
                    .monomials()
                    .zip(&self.a)
                    .map(|(m, &c)| c * self.basis.monomial_partial(m, i, &powers))
                    .sum()
            })
            .collect())
    }

    /// Orbital derivative `ṙ_a(x) = ∇r_a(x) · fx`.
    pub fn orbital_derivative(&self, x: &[f64], fx: &[f64]) -> Result<f64> {
        let g = self.grad(x)?;
        self.basis.check_point(fx)?;
        Ok(g.iter().zip(fx).map(|(a, b)| a * b).sum())
    }
}

/// `r_a(x)`; free-function form of [`PolyCoeffs::eval`].
pub fn eval_poly(c: &PolyCoeffs, x: &[f64]) -> Result<f64> {
    c.eval(x)
}

pub fn monomial_vector(basis: &PolyBasis, x: &[f64]) -> Result<Vec<f64>> {
    basis.monomial_vector(x)
}

pub fn grad_poly_x(c: &PolyCoeffs, x: &[f64]) -> Result<Vec<f64>> {
    c.grad(x)
}

pub fn orbital_derivative_vector(basis: &PolyBasis, x: &[f64], fx: &[f64]) -> Result<Vec<f64>> {
    basis.orbital_derivative_vector(x, fx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn ordering_is_graded_lex() {
        let b = PolyBasis::new(2, 2, true).unwrap();
        let got: Vec<&[u32]> = b.monomials().collect();
        let want: Vec<&[u32]> = vec![&[0, 0], &[1, 0], &[0, 1], &[2, 0], &[1, 1], &[0, 2]];
        assert_eq!(got, want);

        let b = PolyBasis::new(3, 2, false).unwrap();
        let got: Vec<&[u32]> = b.monomials().collect();
        let want: Vec<&[u32]> = vec![
            &[1, 0, 0],
            &[0, 1, 0],
            &[0, 0, 1],
            &[2, 0, 0],
            &[1, 1, 0],
            &[1, 0, 1],
            &[0, 2, 0],
            &[0, 1, 1],
            &[0, 0, 2],
        ];
        assert_eq!(got, want);
    }

    #[test]
    fn basis_counts() {
        for n in 1..=4 {
            for d in 0..=5 {
                let full = PolyBasis::new(n, d, true).unwrap();
                assert_eq!(full.len(), binom(d + n, n));
                let reduced = PolyBasis::new(n, d, false).unwrap();
                assert_eq!(reduced.len(), binom(d + n, n) - 1);
            }
        }
    }

    #[test]
    fn eval_examples() {
        let b = Arc::new(PolyBasis::new(2, 2, true).unwrap());
        assert_eq!(PolyCoeffs::zeros(b.clone()).eval(&[0.3, -2.0]).unwrap(), 0.0);

        // r_a = a0 + a1 x1 + a2 x2 + a12 x1x2 + a11 x1² + a22 x2² at (1, 1)
        let named = [([0, 0], 0.5), ([1, 0], -1.0), ([0, 1], 2.0), ([1, 1], 3.0), ([2, 0], 0.25), ([0, 2], -4.0)];
        let mut a = vec![0.0; b.len()];
        for (e, c) in named {
            a[b.index_of(&e).unwrap()] = c;
        }
        let c = PolyCoeffs::new(b.clone(), a).unwrap();
        let total: f64 = named.iter().map(|(_, c)| c).sum();
        assert!((c.eval(&[1.0, 1.0]).unwrap() - total).abs() < 1e-15);

        let b3 = Arc::new(PolyBasis::new(2, 3, false).unwrap());
        let mut a = vec![0.0; b3.len()];
        a[b3.index_of(&[2, 1]).unwrap()] = 2.0;
        let c = PolyCoeffs::new(b3, a).unwrap();
        assert_eq!(c.eval(&[3.0, 4.0]).unwrap(), 72.0);
        assert!(matches!(c.eval(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn monomial_vector_examples() {
        let b = PolyBasis::new(2, 2, true).unwrap();
        assert_eq!(b.monomial_vector(&[0.0, 0.0]).unwrap(), vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let (x1, x2) = (1.5, -0.5);
        let m = b.monomial_vector(&[x1, x2]).unwrap();
        for (exps, want) in [([0, 0], 1.0), ([1, 0], x1), ([0, 1], x2), ([1, 1], x1 * x2), ([2, 0], x1 * x1), ([0, 2], x2 * x2)] {
            assert_eq!(m[b.index_of(&exps).unwrap()], want);
        }
        let b1 = PolyBasis::new(1, 3, true).unwrap();
        assert_eq!(b1.monomial_vector(&[2.0]).unwrap(), vec![1.0, 2.0, 4.0, 8.0]);
    }

    #[test]
    fn gradient_examples() {
        let b = Arc::new(PolyBasis::new(2, 2, false).unwrap());
        assert_eq!(PolyCoeffs::zeros(b.clone()).grad(&[1.0, 2.0]).unwrap(), vec![0.0, 0.0]);
        let mut a = vec![0.0; b.len()];
        a[b.index_of(&[2, 0]).unwrap()] = 1.0;
        let c = PolyCoeffs::new(b, a).unwrap();
        assert_eq!(c.grad(&[3.0, 7.0]).unwrap(), vec![6.0, 0.0]);
    }

    #[test]
    fn orbital_vector_examples() {
        let b = PolyBasis::new(2, 2, true).unwrap();
        let (x1, x2, f1, f2) = (0.7, -1.3, 2.0, 0.5);
        let w = b.orbital_derivative_vector(&[x1, x2], &[f1, f2]).unwrap();
        for (exps, want) in [
            ([0, 0], 0.0),
            ([1, 0], f1),
            ([0, 1], f2),
            ([1, 1], f1 * x2 + x1 * f2),
            ([2, 0], 2.0 * x1 * f1),
            ([0, 2], 2.0 * x2 * f2),
        ] {
            assert!((w[b.index_of(&exps).unwrap()] - want).abs() < 1e-15);
        }
        let zero = b.orbital_derivative_vector(&[x1, x2], &[0.0, 0.0]).unwrap();
        assert!(zero.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn descriptor_round_trip_and_tag_check() {
        let b = PolyBasis::new(3, 2, false).unwrap();
        let d = b.descriptor();
        assert_eq!(PolyBasis::from_descriptor(&d).unwrap(), b);
        let mut bad = d.clone();
        bad.ordering = "lex".into();
        assert!(matches!(PolyBasis::from_descriptor(&bad), Err(Error::Config(_))));
    }
}
