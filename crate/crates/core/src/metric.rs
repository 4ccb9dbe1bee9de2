//! Conformal metrics `P(x) = e^{r_a(x)} p`, the points of the parameter
//! space `ℝ^N × S⁺_n`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::poly::{PolyBasis, PolyCoeffs};
use crate::spd::{geodesic_point, SpdMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct ConformalMetric {
    pub coeffs: PolyCoeffs,
    pub p: SpdMatrix,
}

impl ConformalMetric {
    pub fn new(coeffs: PolyCoeffs, p: SpdMatrix) -> Result<Self> {
        if coeffs.basis().n_vars() != p.dim() {
            return Err(Error::DimensionMismatch { expected: p.dim(), got: coeffs.basis().n_vars() });
        }
        Ok(Self { coeffs, p })
    }

    /// `r_a = 0`, `p = I`.
    pub fn identity(basis: Arc<PolyBasis>) -> Self {
        let n = basis.n_vars();
        Self { coeffs: PolyCoeffs::zeros(basis), p: SpdMatrix::identity(n) }
    }

    pub fn dim(&self) -> usize {
        self.p.dim()
    }

    pub fn basis(&self) -> &Arc<PolyBasis> {
        self.coeffs.basis()
    }

    /// The point at parameter `theta` on the product geodesic
    /// `((1-θ)a + θb, p #_θ q)`.
    pub fn geodesic(&self, other: &ConformalMetric, theta: f64) -> Result<ConformalMetric> {
        if self.basis() != other.basis() {
            return Err(Error::InvalidInput("metrics use different polynomial bases".into()));
        }
        let a: Vec<f64> = self
            .coeffs
            .coefficients()
            .iter()
            .zip(other.coeffs.coefficients())
            .map(|(x, y)| (1.0 - theta) * x + theta * y)
            .collect();
        let p = geodesic_point(&self.p, &other.p, theta)?;
        Ok(ConformalMetric { coeffs: PolyCoeffs::new(self.basis().clone(), a)?, p })
    }

    /// The full metric tensor at `x`.
    pub fn tensor_at(&self, x: &[f64]) -> Result<nalgebra::DMatrix<f64>> {
        Ok(self.p.as_matrix() * self.coeffs.eval(x)?.exp())
    }
}
