//! Run configuration: the JSON schema, command-line overrides and
//! resolution against a system's defaults.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use resent_core::objective::check_degree_for_domain;
use resent_core::systems::{Registry, SystemCase, SystemParams};
use resent_core::{ConformalMetric, GridConfig, PolyBasis, PolyCoeffs, RunConfig, SpdMatrix, StepRule, Workers};

use crate::error::{CliError, Result};

pub const DEFAULT_OUTPUT_DIR: &str = "resent-out";

/// Starting metric: coefficients in basis order and `p` row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialMetric {
    pub coefficients: Vec<f64>,
    pub p: Vec<f64>,
}

/// Step rule `θ_k = a / (k + b)`; missing parts take the system default.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepRuleSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
}

/// The JSON config file. Every field is optional; missing fields take the
/// system's defaults, except `system`, which is required.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<String>,
    #[serde(default)]
    pub params: SystemParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub include_constant: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refine: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_rule: Option<StepRuleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialMetric>,
    /// Worker threads for the grid scan; all cores when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    /// Fields set in `over` replace those in `self`.
    pub fn merged(mut self, over: ConfigFile) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if over.$f.is_some() { self.$f = over.$f; } )* };
        }
        take!(system, degree, include_constant, grid, refine, max_iters, initial, workers, output_dir);
        if let Some(o) = over.step_rule {
            let r = self.step_rule.get_or_insert_with(StepRuleSpec::default);
            r.a = o.a.or(r.a);
            r.b = o.b.or(r.b);
        }
        let p = over.params;
        let q = &mut self.params;
        for (dst, src) in [
            (&mut q.gamma, p.gamma),
            (&mut q.delta, p.delta),
            (&mut q.sigma, p.sigma),
            (&mut q.rho, p.rho),
            (&mut q.beta, p.beta),
        ] {
            if src.is_some() {
                *dst = src;
            }
        }
        self
    }
}

/// A config with every default filled in and validated against its system.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub case: SystemCase,
    pub run: RunConfig,
    pub workers: Option<usize>,
    pub output_dir: PathBuf,
    /// The fully explicit config, which reproduces the run when fed back.
    pub echo: ConfigFile,
}

impl Resolved {
    pub fn worker_pool(&self) -> Result<Workers> {
        workers(self.workers)
    }
}

pub fn workers(count: Option<usize>) -> Result<Workers> {
    match count {
        None => Ok(Workers::global()),
        Some(0) => Err(CliError::Config("workers must be at least 1".into())),
        Some(n) => Ok(Workers::with_threads(n)?),
    }
}

pub fn resolve(cfg: &ConfigFile, registry: &Registry) -> Result<Resolved> {
    let name = cfg.system.as_deref().ok_or_else(|| CliError::Config("no system given".into()))?;
    let case = registry.build(name, &cfg.params)?;
    let n = case.dim();
    let defaults = &case.defaults;
    let degree = cfg.degree.unwrap_or(defaults.degree);
    let include_constant = cfg.include_constant.unwrap_or(false);
    check_degree_for_domain(&case.domain, degree)?;
    let basis = Arc::new(PolyBasis::new(n, degree, include_constant)?);

    let counts = cfg.grid.clone().unwrap_or_else(|| defaults.grid.clone());
    if counts.len() != n {
        return Err(CliError::Config(format!("{name} needs {n} grid counts, got {}", counts.len())));
    }
    if counts.iter().any(|&c| c < 2) {
        return Err(CliError::Config(format!("grid counts must be at least 2, got {counts:?}")));
    }
    let refine = cfg.refine.unwrap_or(true);
    let spec = cfg.step_rule.unwrap_or_default();
    let step_rule = StepRule {
        a: spec.a.unwrap_or(defaults.step_rule.a),
        b: spec.b.unwrap_or(defaults.step_rule.b),
    };
    step_rule.validate()?;
    let max_iters = cfg.max_iters.unwrap_or(defaults.max_iters);

    let initial = match &cfg.initial {
        None => ConformalMetric::identity(basis.clone()),
        Some(init) => initial_metric(init, &basis)?,
    };
    let workers = cfg.workers;
    if workers == Some(0) {
        return Err(CliError::Config("workers must be at least 1".into()));
    }
    let output_dir = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));

    let echo = ConfigFile {
        system: Some(name.to_string()),
        params: cfg.params,
        degree: Some(degree),
        include_constant: Some(include_constant),
        grid: Some(counts.clone()),
        refine: Some(refine),
        step_rule: Some(StepRuleSpec { a: Some(step_rule.a), b: Some(step_rule.b) }),
        max_iters: Some(max_iters),
        initial: Some(InitialMetric {
            coefficients: initial.coeffs.coefficients().to_vec(),
            p: initial.p.as_matrix().transpose().as_slice().to_vec(),
        }),
        workers,
        output_dir: Some(output_dir.clone()),
    };
    let run = RunConfig { grid: GridConfig { counts, refine }, step_rule, max_iters, initial };
    Ok(Resolved { case, run, workers, output_dir, echo })
}

fn initial_metric(init: &InitialMetric, basis: &Arc<PolyBasis>) -> Result<ConformalMetric> {
    let n = basis.n_vars();
    if init.coefficients.len() != basis.len() {
        return Err(CliError::Config(format!(
            "initial metric has {} coefficients, the basis has {}",
            init.coefficients.len(),
            basis.len()
        )));
    }
    let p = spd_from_rows(&init.p, n)?;
    let coeffs = PolyCoeffs::new(basis.clone(), init.coefficients.clone())?;
    Ok(ConformalMetric::new(coeffs, p)?)
}

/// An SPD matrix from a row-major array; any failure is a config error.
pub fn spd_from_rows(entries: &[f64], n: usize) -> Result<SpdMatrix> {
    if entries.len() != n * n {
        return Err(CliError::Config(format!("p needs {} entries, got {}", n * n, entries.len())));
    }
    SpdMatrix::from_row_slice(n, entries).map_err(|e| CliError::Config(format!("p is not a valid SPD matrix: {e}")))
}
