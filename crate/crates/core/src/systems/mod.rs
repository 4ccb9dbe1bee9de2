//! Dynamical systems, their domains, and the three built-in case studies.

mod cases;
mod domain;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

pub use cases::{
    bouncing_ball_case, bouncing_ball_entropy, henon_bounds, henon_case, henon_equilibria, lorenz_case,
    lorenz_entropy, lorenz_reference_metric, CaseDefaults, LorenzReference, ReferenceValues, Registry,
    SystemCase, SystemParams, BOUNCING_BALL, HENON, LORENZ,
};
pub use domain::{grid_points, refine_around, Domain, Grid, GridAxis, GridCursor, ParamAxis};

/// A discrete-time system `x ↦ φ(x)` with Jacobian `A(x) = Dφ(x)`.
pub trait DiscreteMap: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn map(&self, x: &[f64], out: &mut [f64]);
    /// Row-major `n × n` Jacobian.
    fn jacobian(&self, x: &[f64], out: &mut [f64]);
}

/// A continuous-time system `ẋ = F(x)` with Jacobian `A(x) = DF(x)`.
pub trait VectorField: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn field(&self, x: &[f64], out: &mut [f64]);
    /// Row-major `n × n` Jacobian.
    fn jacobian(&self, x: &[f64], out: &mut [f64]);
}

#[derive(Debug, Clone)]
pub enum Dynamics {
    Discrete(Arc<dyn DiscreteMap>),
    Continuous(Arc<dyn VectorField>),
}

impl Dynamics {
    pub fn dim(&self) -> usize {
        match self {
            Dynamics::Discrete(m) => m.dim(),
            Dynamics::Continuous(f) => f.dim(),
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, Dynamics::Discrete(_))
    }

    /// `φ(x)` for maps, `F(x)` for vector fields.
    pub fn image(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        match self {
            Dynamics::Discrete(m) => m.map(x, &mut out),
            Dynamics::Continuous(f) => f.field(x, &mut out),
        }
        out
    }

    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let n = x.len();
        let mut out = vec![0.0; n * n];
        match self {
            Dynamics::Discrete(m) => m.jacobian(x, &mut out),
            Dynamics::Continuous(f) => f.jacobian(x, &mut out),
        }
        DMatrix::from_row_slice(n, n, &out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Henon {
    pub a: f64,
    pub b: f64,
}

impl DiscreteMap for Henon {
    fn dim(&self) -> usize {
        2
    }

    #[inline]
    fn map(&self, x: &[f64], out: &mut [f64]) {
        out[0] = self.a - x[0] * x[0] + self.b * x[1];
        out[1] = x[0];
    }

    #[inline]
    fn jacobian(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&[-2.0 * x[0], self.b, 1.0, 0.0]);
    }
}

/// Harmonically forced bouncing ball on the cylinder `S¹ × ℝ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BouncingBall {
    pub gamma: f64,
    pub delta: f64,
}

impl DiscreteMap for BouncingBall {
    fn dim(&self) -> usize {
        2
    }

    #[inline]
    fn map(&self, x: &[f64], out: &mut [f64]) {
        let s = x[0] + x[1];
        out[0] = s;
        out[1] = self.gamma * x[1] - self.delta * s.cos();
    }

    #[inline]
    fn jacobian(&self, x: &[f64], out: &mut [f64]) {
        let ds = self.delta * (x[0] + x[1]).sin();
        out.copy_from_slice(&[1.0, 1.0, ds, self.gamma + ds]);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lorenz {
    pub sigma: f64,
    pub rho: f64,
    pub beta: f64,
}

impl VectorField for Lorenz {
    fn dim(&self) -> usize {
        3
    }

    #[inline]
    fn field(&self, x: &[f64], out: &mut [f64]) {
        out[0] = self.sigma * (x[1] - x[0]);
        out[1] = x[0] * (self.rho - x[2]) - x[1];
        out[2] = x[0] * x[1] - self.beta * x[2];
    }

    #[inline]
    fn jacobian(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&[
            -self.sigma,
            self.sigma,
            0.0,
            self.rho - x[2],
            -1.0,
            -x[0],
            x[1],
            x[0],
            -self.beta,
        ]);
    }
}

pub type VecFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// A user-supplied map or field. Without an explicit Jacobian, central
/// differences are used.
#[derive(Clone)]
pub struct CustomSystem {
    pub name: String,
    pub dim: usize,
    pub f: VecFn,
    pub jac: Option<VecFn>,
}

impl fmt::Debug for CustomSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomSystem")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("analytic_jacobian", &self.jac.is_some())
            .finish()
    }
}

impl CustomSystem {
    fn eval_jacobian(&self, x: &[f64], out: &mut [f64]) {
        match &self.jac {
            Some(j) => j(x, out),
            None => central_difference_jacobian(&*self.f, x, out),
        }
    }
}

impl DiscreteMap for CustomSystem {
    fn dim(&self) -> usize {
        self.dim
    }
    fn map(&self, x: &[f64], out: &mut [f64]) {
        (self.f)(x, out)
    }
    fn jacobian(&self, x: &[f64], out: &mut [f64]) {
        self.eval_jacobian(x, out)
    }
}

impl VectorField for CustomSystem {
    fn dim(&self) -> usize {
        self.dim
    }
    fn field(&self, x: &[f64], out: &mut [f64]) {
        (self.f)(x, out)
    }
    fn jacobian(&self, x: &[f64], out: &mut [f64]) {
        self.eval_jacobian(x, out)
    }
}

/// Row-major Jacobian of `f` at `x` by central differences.
pub fn central_difference_jacobian(f: &dyn Fn(&[f64], &mut [f64]), x: &[f64], out: &mut [f64]) {
    let n = x.len();
    let mut xp = x.to_vec();
    let mut fp = vec![0.0; n];
    let mut fm = vec![0.0; n];
    for j in 0..n {
        let h = 1e-6 * x[j].abs().max(1.0);
        xp[j] = x[j] + h;
        f(&xp, &mut fp);
        xp[j] = x[j] - h;
        f(&xp, &mut fm);
        xp[j] = x[j];
        for i in 0..n {
            out[i * n + j] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn custom_system_uses_numeric_jacobian() {
        let sys = CustomSystem {
            name: "rot".into(),
            dim: 2,
            f: Arc::new(|x: &[f64], out: &mut [f64]| {
                out[0] = x[0].sin() + x[1];
                out[1] = x[0] * x[1];
            }),
            jac: None,
        };
        let mut j = [0.0; 4];
        DiscreteMap::jacobian(&sys, &[0.3, 2.0], &mut j);
        let want = [0.3f64.cos(), 1.0, 2.0, 0.3];
        for (a, b) in j.iter().zip(want) {
            assert!((a - b).abs() < 1e-8);
        }
    }
}
