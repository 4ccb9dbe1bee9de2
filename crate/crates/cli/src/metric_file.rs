//! `best_metric.json`: a conformal metric together with everything needed
//! to re-evaluate it.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use resent_core::poly::BasisDescriptor;
use resent_core::systems::SystemParams;
use resent_core::{ConformalMetric, GridConfig, PolyBasis, PolyCoeffs};

use crate::config::spd_from_rows;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub counts: Vec<usize>,
    pub refine: bool,
}

impl From<&GridConfig> for GridSpec {
    fn from(g: &GridConfig) -> Self {
        Self { counts: g.counts.clone(), refine: g.refine }
    }
}

impl From<&GridSpec> for GridConfig {
    fn from(g: &GridSpec) -> Self {
        GridConfig { counts: g.counts.clone(), refine: g.refine }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricFile {
    pub system: String,
    #[serde(default)]
    pub params: SystemParams,
    pub basis: BasisDescriptor,
    /// Coefficients of `r_a` in basis order.
    pub coefficients: Vec<f64>,
    /// `p`, row-major.
    pub p: Vec<f64>,
    /// Grid the metric was evaluated on; the system default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    /// Entropy estimate recorded with the metric, informational only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

impl MetricFile {
    pub fn new(system: &str, params: SystemParams, metric: &ConformalMetric, grid: &GridConfig, value: f64) -> Self {
        Self {
            system: system.to_string(),
            params,
            basis: metric.basis().descriptor(),
            coefficients: metric.coeffs.coefficients().to_vec(),
            p: metric.p.to_rows().concat(),
            grid: Some(grid.into()),
            value: Some(value),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read metric file {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("invalid metric file {}: {e}", path.display())))
    }

    /// The stored metric. Fails on an unknown monomial ordering rather than
    /// reinterpreting the coefficients.
    pub fn metric(&self) -> Result<ConformalMetric> {
        let basis = Arc::new(PolyBasis::from_descriptor(&self.basis).map_err(|e| CliError::Config(e.to_string()))?);
        if self.coefficients.len() != basis.len() {
            return Err(CliError::Config(format!(
                "metric file has {} coefficients, its basis has {}",
                self.coefficients.len(),
                basis.len()
            )));
        }
        let p = spd_from_rows(&self.p, basis.n_vars())?;
        let coeffs = PolyCoeffs::new(basis, self.coefficients.clone()).map_err(|e| CliError::Config(e.to_string()))?;
        ConformalMetric::new(coeffs, p).map_err(|e| CliError::Config(e.to_string()))
    }
}
