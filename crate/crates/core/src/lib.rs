//! Upper bounds on the restoration entropy of smooth dynamical systems by
//! geodesically convex optimization over conformal Riemannian metrics.
//!
//! The parameter space is `ℝ^N × S⁺_n`: polynomial coefficients `a` of a
//! conformal factor `e^{r_a(x)}` and a constant SPD matrix `p`. For each metric
//! the worst-case expansion rate over the domain gives an upper bound; the
//! optimizer minimizes that bound by Riemannian subgradient steps.

pub mod error;
pub mod metric;
pub mod objective;
pub mod optimizer;
pub mod poly;
pub mod spd;
pub mod subgradient;
pub mod systems;

pub use error::{Error, Result};
pub use metric::ConformalMetric;
pub use objective::{maximize, GridConfig, InnerMaxResult, PointEval, Workers};
pub use optimizer::{evaluate_metric, run, run_with, IterationRecord, RunConfig, RunFailure, RunResult, StepRule};
pub use poly::{PolyBasis, PolyCoeffs};
pub use spd::{SpdMatrix, SymMatrix};
pub use subgradient::{full_subgradient, TangentVector};
pub use systems::{Domain, Dynamics, Registry, SystemCase, SystemParams};
