use std::collections::BTreeMap;
use std::f64::consts::LN_2;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{BouncingBall, CustomSystem, Domain, Dynamics, Henon, Lorenz, VecFn};
use crate::error::{Error, Result};
use crate::metric::ConformalMetric;
use crate::optimizer::StepRule;
use crate::poly::{PolyBasis, PolyCoeffs};
use crate::spd::SpdMatrix;

pub const HENON: &str = "henon";
pub const BOUNCING_BALL: &str = "bouncing_ball";
pub const LORENZ: &str = "lorenz";

const HENON_A: f64 = 1.4;
const HENON_B: f64 = 0.3;
/// Trapping quadrilateral of the standard Hénon map, corners A, B, C, D.
const HENON_CORNERS: [[f64; 2]; 4] = [[-1.862, 1.96], [1.848, 0.6267], [1.743, -0.6533], [-1.484, -2.3333]];

/// Closed-form entropy values and bounds known for a case.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ReferenceValues {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entropy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
}

impl ReferenceValues {
    pub fn is_empty(&self) -> bool {
        self.entropy.is_none() && self.lower.is_none() && self.upper.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseDefaults {
    pub grid: Vec<usize>,
    pub step_rule: StepRule,
    pub degree: usize,
    pub max_iters: usize,
}

#[derive(Debug, Clone)]
pub struct SystemCase {
    pub name: String,
    pub dynamics: Dynamics,
    pub domain: Domain,
    pub reference: ReferenceValues,
    pub defaults: CaseDefaults,
}

impl SystemCase {
    pub fn dim(&self) -> usize {
        self.dynamics.dim()
    }

    pub fn is_discrete(&self) -> bool {
        self.dynamics.is_discrete()
    }

    fn custom(name: &str, dim: usize, f: VecFn, jac: Option<VecFn>, domain: Domain, defaults: CaseDefaults, discrete: bool) -> Result<Self> {
        domain.validate()?;
        if domain.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: domain.dim() });
        }
        let sys = Arc::new(CustomSystem { name: name.to_string(), dim, f, jac });
        let dynamics = if discrete { Dynamics::Discrete(sys) } else { Dynamics::Continuous(sys) };
        Ok(Self { name: name.to_string(), dynamics, domain, reference: ReferenceValues::default(), defaults })
    }

    /// A user-defined map `φ` on `domain`; `jac = None` falls back to central
    /// differences.
    pub fn custom_discrete(name: &str, dim: usize, map: VecFn, jac: Option<VecFn>, domain: Domain, defaults: CaseDefaults) -> Result<Self> {
        Self::custom(name, dim, map, jac, domain, defaults, true)
    }

    /// A user-defined vector field `F` on `domain`.
    pub fn custom_continuous(name: &str, dim: usize, field: VecFn, jac: Option<VecFn>, domain: Domain, defaults: CaseDefaults) -> Result<Self> {
        Self::custom(name, dim, field, jac, domain, defaults, false)
    }
}

/// Optional parameter overrides for the built-in systems.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

/// `x_± = (b - 1 ± √((b-1)² + 4a)) / 2`, the x-coordinates of the Hénon
/// equilibria `e_± = (x_±, x_±)`.
pub fn henon_equilibria(a: f64, b: f64) -> (f64, f64) {
    let root = ((b - 1.0).powi(2) + 4.0 * a).sqrt();
    ((b - 1.0 + root) / 2.0, (b - 1.0 - root) / 2.0)
}

/// `(lower, upper)` bounds on the restoration entropy of any compact
/// forward-invariant set of the standard Hénon map.
pub fn henon_bounds() -> (f64, f64) {
    let (a, b) = (HENON_A, HENON_B);
    let (xp, xm) = henon_equilibria(a, b);
    let upper = ((xm * xm + b).sqrt() - xm).log2();
    let lower = ((xp * xp + b).sqrt() + xp).log2();
    (lower, upper)
}

pub fn henon_case() -> SystemCase {
    let (lower, upper) = henon_bounds();
    SystemCase {
        name: HENON.into(),
        dynamics: Dynamics::Discrete(Arc::new(Henon { a: HENON_A, b: HENON_B })),
        domain: Domain::Quadrilateral { corners: HENON_CORNERS },
        reference: ReferenceValues { entropy: None, lower: Some(lower), upper: Some(upper) },
        defaults: CaseDefaults {
            grid: vec![1000, 1000],
            step_rule: StepRule { a: 16.0, b: 0.0 },
            degree: 3,
            max_iters: 4000,
        },
    }
}

/// `log₂(1 + γ + δ + √((1+γ+δ)² - 4γ)) - 1`.
pub fn bouncing_ball_entropy(gamma: f64, delta: f64) -> f64 {
    let s = 1.0 + gamma + delta;
    (s + (s * s - 4.0 * gamma).sqrt()).log2() - 1.0
}

pub fn bouncing_ball_case(gamma: f64, delta: f64) -> Result<SystemCase> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::OutOfRange(format!("bouncing ball needs gamma in (0, 1), got {gamma}")));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::OutOfRange(format!("bouncing ball needs delta > 0, got {delta}")));
    }
    let band = delta / (1.0 - gamma);
    Ok(SystemCase {
        name: BOUNCING_BALL.into(),
        dynamics: Dynamics::Discrete(Arc::new(BouncingBall { gamma, delta })),
        domain: Domain::Cylinder { lower: vec![-band], upper: vec![band] },
        reference: ReferenceValues { entropy: Some(bouncing_ball_entropy(gamma, delta)), lower: None, upper: None },
        defaults: CaseDefaults {
            grid: vec![1000, 1000],
            step_rule: StepRule { a: 1.0, b: 0.0 },
            degree: 0,
            max_iters: 40,
        },
    })
}

/// `(√((σ-1)² + 4ρσ) - (σ+1)) / (2 ln 2)`.
pub fn lorenz_entropy(sigma: f64, rho: f64, _beta: f64) -> f64 {
    (((sigma - 1.0).powi(2) + 4.0 * rho * sigma).sqrt() - (sigma + 1.0)) / (2.0 * LN_2)
}

pub fn lorenz_case(sigma: f64, rho: f64, beta: f64) -> Result<SystemCase> {
    if ![sigma, rho, beta].iter().all(|v| *v > 0.0 && v.is_finite()) {
        return Err(Error::OutOfRange(format!(
            "Lorenz parameters must be positive, got sigma={sigma}, rho={rho}, beta={beta}"
        )));
    }
    Ok(SystemCase {
        name: LORENZ.into(),
        dynamics: Dynamics::Continuous(Arc::new(Lorenz { sigma, rho, beta })),
        domain: Domain::Ball { center: vec![0.0, 0.0, sigma + rho], radius: (beta / 2.0).sqrt() * (sigma + rho) },
        reference: ReferenceValues { entropy: Some(lorenz_entropy(sigma, rho, beta)), lower: None, upper: None },
        defaults: CaseDefaults {
            grid: vec![500, 50, 100],
            step_rule: StepRule { a: 2.0, b: 0.0 },
            degree: 2,
            max_iters: 4000,
        },
    })
}

/// Analytic conformal metric realizing the Lorenz restoration entropy,
/// `e^{r(x,y,z)} M` with
/// `r = aθ(γ₁x² + γ₂(y² + z² + (β-1)²x²/σ²) + γ₃z)`.
#[derive(Debug, Clone)]
pub struct LorenzReference {
    pub a: f64,
    pub theta: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub matrix: SpdMatrix,
}

impl LorenzReference {
    pub fn coeff_x2(&self, sigma: f64, beta: f64) -> f64 {
        self.a * self.theta * (self.gamma1 + self.gamma2 * (beta - 1.0).powi(2) / (sigma * sigma))
    }

    pub fn coeff_y2(&self) -> f64 {
        self.a * self.theta * self.gamma2
    }

    pub fn coeff_z(&self) -> f64 {
        self.a * self.theta * self.gamma3
    }

    /// The metric over the degree-2, constant-free basis in three variables.
    pub fn metric(&self, sigma: f64, beta: f64) -> Result<ConformalMetric> {
        let basis = Arc::new(PolyBasis::new(3, 2, false)?);
        let mut a = vec![0.0; basis.len()];
        let mut set = |e: [u32; 3], v: f64| {
            let i = basis.index_of(&e).expect("monomial in degree-2 basis");
            a[i] = v;
        };
        set([2, 0, 0], self.coeff_x2(sigma, beta));
        set([0, 2, 0], self.coeff_y2());
        set([0, 0, 2], self.coeff_y2());
        set([0, 0, 1], self.coeff_z());
        ConformalMetric::new(PolyCoeffs::new(basis, a)?, self.matrix.clone())
    }
}

pub fn lorenz_reference_metric(sigma: f64, rho: f64, beta: f64) -> Result<LorenzReference> {
    let a = sigma / (rho * sigma + (beta - 1.0) * (sigma - beta)).sqrt();
    let theta = 1.0 / (2.0 * ((sigma + 1.0 - 2.0 * beta).powi(2) + (2.0 * sigma / a).powi(2)).sqrt());
    let gamma3 = -4.0 * sigma / (a * beta);
    let gamma2 = a / 2.0;
    let gamma1 = -(2.0 * (gamma2 / sigma) * (rho * sigma - (beta - 1.0).powi(2)) + gamma3 + (2.0 / sigma) * a * (beta - 1.0))
        / (2.0 * sigma);
    let m11 = (rho * sigma + (beta - 1.0) * (sigma - 1.0)) / (sigma * sigma);
    let m12 = -(beta - 1.0) / sigma;
    let matrix = SpdMatrix::from_row_slice(3, &[m11, m12, 0.0, m12, 1.0, 0.0, 0.0, 0.0, 1.0])?;
    Ok(LorenzReference { a, theta, gamma1, gamma2, gamma3, matrix })
}

type Constructor = Arc<dyn Fn(&SystemParams) -> Result<SystemCase> + Send + Sync>;

/// Named system constructors; the built-ins plus anything registered.
#[derive(Clone)]
pub struct Registry {
    entries: BTreeMap<String, Constructor>,
}

impl std::fmt::Debug for Registry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Registry").field("names", &self.names()).finish()
    }
}

impl Default for Registry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl Registry {
    pub fn builtin() -> Self {
        let mut r = Self { entries: BTreeMap::new() };
        r.register(HENON, |p: &SystemParams| {
            if p != &SystemParams::default() {
                return Err(Error::Config("the Hénon case has no parameter overrides".into()));
            }
            Ok(henon_case())
        });
        r.register(BOUNCING_BALL, |p: &SystemParams| {
            reject_foreign(p, &[p.sigma, p.rho, p.beta], BOUNCING_BALL)?;
            bouncing_ball_case(p.gamma.unwrap_or(0.1), p.delta.unwrap_or(2.0))
        });
        r.register(LORENZ, |p: &SystemParams| {
            reject_foreign(p, &[p.gamma, p.delta], LORENZ)?;
            lorenz_case(p.sigma.unwrap_or(10.0), p.rho.unwrap_or(28.0), p.beta.unwrap_or(8.0 / 3.0))
        });
        r
    }

    pub fn register<F>(&mut self, name: &str, ctor: F)
    where
        F: Fn(&SystemParams) -> Result<SystemCase> + Send + Sync + 'static,
    {
        self.entries.insert(name.to_string(), Arc::new(ctor));
    }

    pub fn names(&self) -> Vec<String> {
        self.entries.keys().cloned().collect()
    }

    pub fn build(&self, name: &str, params: &SystemParams) -> Result<SystemCase> {
        let ctor = self
            .entries
            .get(name)
            .ok_or_else(|| Error::Config(format!("unknown system {name:?}; known: {:?}", self.names())))?;
        ctor(params)
    }
}

fn reject_foreign(_p: &SystemParams, foreign: &[Option<f64>], name: &str) -> Result<()> {
    if foreign.iter().any(Option::is_some) {
        return Err(Error::Config(format!("parameter override not applicable to {name}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn henon_values() {
        let case = henon_case();
        assert_eq!(case.dynamics.image(&[0.0, 0.0]), vec![1.4, 0.0]);
        let a = case.dynamics.jacobian(&[0.0, 0.0]);
        assert_eq!(a.as_slice(), nalgebra::DMatrix::from_row_slice(2, 2, &[0.0, 0.3, 1.0, 0.0]).as_slice());
        assert!((a.determinant() + 0.3).abs() < 1e-15);
        let (_, xm) = henon_equilibria(1.4, 0.3);
        assert!((xm + 1.583896).abs() < 1e-6);
        let (lower, upper) = henon_bounds();
        assert!((upper - 1.704793).abs() < 1e-6);
        assert!((lower - 0.9439130).abs() < 1e-6);
    }

    #[test]
    fn bouncing_ball_values() {
        let case = bouncing_ball_case(0.1, 2.0).unwrap();
        match &case.domain {
            Domain::Cylinder { lower, upper } => {
                assert!((upper[0] - 20.0 / 9.0).abs() < 1e-15);
                assert!((lower[0] + 20.0 / 9.0).abs() < 1e-15);
            }
            other => panic!("unexpected domain {other:?}"),
        }
        for x in [[0.3, 1.0], [2.0, -1.5], [5.0, 0.1]] {
            assert!((case.dynamics.jacobian(&x).determinant() - 0.1).abs() < 1e-14);
        }
        assert!((bouncing_ball_entropy(0.1, 2.0) - 1.617015883755).abs() < 1e-11);
        let s: f64 = 1.0 + 0.1 + 2.0;
        assert!((s * s - 0.4 - 9.21).abs() < 1e-12);
        assert!((bouncing_ball_entropy(1e-15, 1.0) - 1.0).abs() < 1e-12);
        assert!(bouncing_ball_case(1.0, 2.0).is_err());
        assert!(bouncing_ball_case(0.5, 0.0).is_err());
    }

    #[test]
    fn lorenz_values() {
        let case = lorenz_case(10.0, 28.0, 8.0 / 3.0).unwrap();
        match &case.domain {
            Domain::Ball { radius, center } => {
                assert!((radius - (4.0f64 / 3.0).sqrt() * 38.0).abs() < 1e-12);
                assert!((radius - 43.8786).abs() < 1e-4);
                assert_eq!(center, &vec![0.0, 0.0, 38.0]);
            }
            other => panic!("unexpected domain {other:?}"),
        }
        let a = case.dynamics.jacobian(&[0.0, 0.0, 0.0]);
        let want = nalgebra::DMatrix::from_row_slice(3, 3, &[-10.0, 10.0, 0.0, 28.0, -1.0, 0.0, 0.0, 0.0, -8.0 / 3.0]);
        assert_eq!(a, want);
        assert_eq!(case.defaults.grid, vec![500, 50, 100]);
        assert!((lorenz_entropy(10.0, 28.0, 8.0 / 3.0) - 17.063797967999616).abs() < 1e-11);
        assert!((81.0f64 + 1120.0 - 1201.0).abs() == 0.0);
        assert!(lorenz_entropy(1.0, 1e-300, 1.0) < 0.0);
    }

    #[test]
    fn lorenz_reference_constants() {
        let r = lorenz_reference_metric(10.0, 28.0, 8.0 / 3.0).unwrap();
        assert!((r.a - 0.5849832).abs() < 1e-6);
        assert!((r.theta - 0.01442775).abs() < 1e-6);
        assert!((r.gamma3.abs() - 25.64176).abs() < 1e-5);
        assert!(r.gamma3 < 0.0);
        assert!((r.gamma2 - 0.2924916).abs() < 1e-6);
        assert!((r.gamma1 - 0.4614867).abs() < 1e-6);
        let m = r.matrix.as_matrix();
        assert!((m[(0, 0)] - 2.95).abs() < 1e-12);
        assert!((m[(0, 1)] + 0.1666667).abs() < 1e-7);
        assert!((r.coeff_z() * 100.0 + 21.64162).abs() < 1e-4);
        assert!((r.coeff_x2(10.0, 8.0 / 3.0) * 100.0 - 0.3963516).abs() < 1e-6);
        assert!((r.coeff_y2() * 100.0 - 0.2468626).abs() < 1e-6);
    }

    #[test]
    fn registry_builds_and_rejects() {
        let r = Registry::builtin();
        assert_eq!(r.names(), vec![BOUNCING_BALL.to_string(), HENON.to_string(), LORENZ.to_string()]);
        let bb = r.build(BOUNCING_BALL, &SystemParams { gamma: Some(0.2), ..Default::default() }).unwrap();
        assert!((bb.reference.entropy.unwrap() - bouncing_ball_entropy(0.2, 2.0)).abs() < 1e-15);
        assert!(matches!(r.build("duffing", &SystemParams::default()), Err(Error::Config(_))));
        assert!(r.build(LORENZ, &SystemParams { gamma: Some(0.2), ..Default::default() }).is_err());
    }
}
