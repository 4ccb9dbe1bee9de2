//! Riemannian subgradient descent on `ℝ^N × S⁺_n` with a diminishing step
//! size, keeping the best metric seen.

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::ConformalMetric;
use crate::objective::{check_degree_for_domain, entropy_estimate, maximize, value_to_entropy, GridConfig, Workers};
use crate::poly::PolyCoeffs;
use crate::spd::{geodesic_from_velocity_factored, SpdMatrix};
use crate::subgradient::{full_subgradient, TangentVector};
use crate::systems::SystemCase;

/// Relative subgradient norm treated as zero.
pub const ZERO_SUBGRAD_TOL: f64 = 1e-14;

/// `θ_k = a / (k + b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRule {
    pub a: f64,
    #[serde(default)]
    pub b: f64,
}

impl StepRule {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        let rule = Self { a, b };
        rule.validate()?;
        Ok(rule)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) || !(self.b >= 0.0 && self.b.is_finite()) {
            return Err(Error::Config(format!("step rule needs a > 0 and b >= 0, got a = {}, b = {}", self.a, self.b)));
        }
        Ok(())
    }

    /// Step size for iteration `k ≥ 1`.
    pub fn theta(&self, k: usize) -> f64 {
        self.a / (k as f64 + self.b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    /// Step taken after this evaluation; 0 when none was taken.
    pub theta: f64,
    pub value: f64,
    pub best_value: f64,
    pub x_star: Vec<f64>,
    pub k_star: usize,
    pub subgrad_norm: f64,
    pub gap_ok: bool,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub step_rule: StepRule,
    pub max_iters: usize,
    pub initial: ConformalMetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    MaxIters,
    ZeroSubgradient,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub best_value: f64,
    pub best_metric: ConformalMetric,
    pub best_iteration: usize,
    pub records: Vec<IterationRecord>,
    pub termination: Termination,
    pub config: RunConfig,
}

/// An aborted run: the error plus everything recorded before it.
#[derive(Debug, Clone)]
pub struct RunFailure {
    pub error: Error,
    pub records: Vec<IterationRecord>,
    pub best: Option<(f64, ConformalMetric, usize)>,
}

impl fmt::Display for RunFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "run aborted after {} iterations: {}", self.records.len(), self.error)
    }
}

impl std::error::Error for RunFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// Moves `current` a distance `θ` along the product geodesic with unit
/// velocity `-s / |s|`.
pub fn step(current: &ConformalMetric, s: &TangentVector, theta: f64) -> Result<ConformalMetric> {
    if !(s.norm > 0.0) {
        return Err(Error::InvalidInput("cannot step along a zero subgradient".into()));
    }
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::OutOfRange(format!("step size must be positive, got {theta}")));
    }
    let a: Vec<f64> = current
        .coeffs
        .coefficients()
        .iter()
        .zip(&s.s1)
        .map(|(a, g)| a - theta * g / s.norm)
        .collect();
    let v = s.s2.as_matrix() * (-1.0 / s.norm);
    let f = current.p.factor();
    let p = geodesic_from_velocity_factored(&f, &v, theta).map_err(|e| match e {
        Error::NotPositiveDefinite { min_eig, max_eig } => Error::NotPositiveDefinite { min_eig, max_eig },
        other => other,
    })?;
    // re-validate after symmetrization
    let p = SpdMatrix::new(p.as_matrix().clone())?;
    ConformalMetric::new(PolyCoeffs::new(current.basis().clone(), a)?, p)
}

fn check_config(case: &SystemCase, config: &RunConfig) -> Result<()> {
    config.step_rule.validate()?;
    if config.initial.dim() != case.dim() {
        return Err(Error::DimensionMismatch { expected: case.dim(), got: config.initial.dim() });
    }
    check_degree_for_domain(&case.domain, config.initial.basis().degree())
}

/// Runs the subgradient iteration; `on_record` sees every record as it is
/// produced.
pub fn run_with(
    case: &SystemCase,
    config: &RunConfig,
    workers: &Workers,
    mut on_record: impl FnMut(&IterationRecord),
) -> std::result::Result<RunResult, RunFailure> {
    let mut records = Vec::with_capacity(config.max_iters + 1);
    let mut best: Option<(f64, ConformalMetric, usize)> = None;
    if let Err(error) = check_config(case, config) {
        return Err(RunFailure { error, records, best });
    }
    let start = Instant::now();
    let mut current = config.initial.clone();
    let mut termination = Termination::MaxIters;
    for k in 1..=config.max_iters + 1 {
        let outcome = (|| {
            let inner = maximize(case, &current, &config.grid, workers)?;
            let s = full_subgradient(case, &current, &inner)?;
            Ok::<_, Error>((inner, s))
        })();
        let (inner, s) = match outcome {
            Ok(v) => v,
            Err(error) => return Err(RunFailure { error, records, best }),
        };
        let value = value_to_entropy(case, inner.value);
        if best.as_ref().map_or(true, |(b, _, _)| value < *b) {
            best = Some((value, current.clone(), k));
        }
        let zero = s.norm <= ZERO_SUBGRAD_TOL * (1.0 + inner.value.abs());
        let last = k == config.max_iters + 1;
        let theta = if zero || last { 0.0 } else { config.step_rule.theta(k) };
        let record = IterationRecord {
            k,
            theta,
            value,
            best_value: best.as_ref().map(|b| b.0).unwrap_or(value),
            x_star: inner.x_star.clone(),
            k_star: inner.k_star,
            subgrad_norm: s.norm,
            gap_ok: inner.gap_ok,
            wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        };
        log::debug!("iteration {k}: value {value:.12} best {:.12} |s| {:.3e}", record.best_value, s.norm);
        on_record(&record);
        records.push(record);
        if zero {
            termination = Termination::ZeroSubgradient;
            break;
        }
        if last {
            break;
        }
        match step(&current, &s, theta) {
            Ok(next) => current = next,
            Err(error) => return Err(RunFailure { error, records, best }),
        }
    }
    let (best_value, best_metric, best_iteration) = best.expect("at least one iteration runs");
    Ok(RunResult { best_value, best_metric, best_iteration, records, termination, config: config.clone() })
}

pub fn run(case: &SystemCase, config: &RunConfig, workers: &Workers) -> std::result::Result<RunResult, RunFailure> {
    run_with(case, config, workers, |_| {})
}

/// Entropy estimate certified by a stored metric.
pub fn evaluate_metric(case: &SystemCase, metric: &ConformalMetric, grid: &GridConfig, workers: &Workers) -> Result<f64> {
    if metric.dim() != case.dim() {
        return Err(Error::DimensionMismatch { expected: case.dim(), got: metric.dim() });
    }
    entropy_estimate(case, metric, grid, workers)
}
