//! The `run`, `evaluate` and `bounds` subcommands as library functions.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use resent_core::objective::{maximize, value_to_entropy};
use resent_core::optimizer::Termination;
use resent_core::systems::{Registry, ReferenceValues, SystemParams};
use resent_core::{run_with, GridConfig, IterationRecord};

use crate::config::{self, Resolved};
use crate::error::{CliError, Result};
use crate::metric_file::{GridSpec, MetricFile};
use crate::output::{
    self, IterationLog, Outcome, Summary, BEST_METRIC_JSON, CONVERGENCE_SVG, SUMMARY_JSON,
};
use crate::plot;

/// Runs the optimizer and writes all outputs into the configured
/// directory. On a numerical abort the partial outputs are still written
/// and the error is returned.
pub fn run(resolved: &Resolved) -> Result<Summary> {
    let dir = &resolved.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| CliError::output(dir, e))?;
    let workers = resolved.worker_pool()?;
    let case = &resolved.case;
    let mut log = IterationLog::create(dir, case.dim())?;
    let mut write_error = None;
    let start = Instant::now();
    let result = run_with(case, &resolved.run, &workers, |rec| {
        if rec.k == 1 || rec.k % 100 == 0 {
            log::info!("iteration {}: value {:.12}, best {:.12}", rec.k, rec.value, rec.best_value);
        }
        if write_error.is_none() {
            write_error = log.append(rec).err();
        }
    });
    let wall_time_s = start.elapsed().as_secs_f64();
    if let Some(e) = write_error {
        return Err(e);
    }

    let (records, best, outcome, error) = match result {
        Ok(r) => {
            let outcome = match r.termination {
                Termination::MaxIters => Outcome::MaxIters,
                Termination::ZeroSubgradient => Outcome::ZeroSubgradient,
            };
            (r.records, Some((r.best_value, r.best_metric, r.best_iteration)), outcome, None)
        }
        Err(f) => (f.records, f.best, Outcome::Aborted, Some(f.error)),
    };

    if let Some((value, metric, _)) = &best {
        let file = MetricFile::new(&case.name, resolved.echo.params, metric, &resolved.run.grid, *value);
        output::write_json(&dir.join(BEST_METRIC_JSON), &file)?;
    }
    let summary = Summary {
        system: case.name.clone(),
        params: resolved.echo.params,
        outcome,
        error: error.as_ref().map(|e| e.to_string()),
        best_value: best.as_ref().map(|b| b.0),
        best_iteration: best.as_ref().map(|b| b.2),
        initial_value: records.first().map(|r| r.value),
        final_value: records.last().map(|r| r.value),
        iterations: records.len(),
        gap_warnings: records.iter().filter(|r| !r.gap_ok).count(),
        reference: case.reference,
        wall_time_s,
        config: resolved.echo.clone(),
    };
    output::write_json(&dir.join(SUMMARY_JSON), &summary)?;
    write_plot(dir, &case.name, &records)?;

    match error {
        None => Ok(summary),
        Some(e) => {
            let done = records.len();
            Err(match CliError::from(e) {
                CliError::Numerical(msg) => CliError::Numerical(format!(
                    "{msg} (after {done} iterations; partial outputs in {})",
                    dir.display()
                )),
                other => other,
            })
        }
    }
}

fn write_plot(dir: &Path, system: &str, records: &[IterationRecord]) -> Result<()> {
    let points: Vec<_> = records.iter().map(|r| (r.k, r.value, r.best_value)).collect();
    let path = dir.join(CONVERGENCE_SVG);
    let svg = plot::convergence_svg(system, &points).map_err(|e| CliError::output(&path, std::io::Error::other(e)))?;
    std::fs::write(&path, svg).map_err(|e| CliError::output(&path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub system: String,
    pub value: f64,
    pub x_star: Vec<f64>,
    pub k_star: usize,
    pub gap_ok: bool,
    pub grid: GridSpec,
}

/// Options of `evaluate` beyond the metric file.
#[derive(Debug, Clone, Default)]
pub struct EvaluateOptions {
    pub system: Option<String>,
    pub grid: Option<Vec<usize>>,
    pub refine: Option<bool>,
    pub workers: Option<usize>,
}

/// Entropy estimate certified by a stored metric. The grid defaults to the
/// one stored with the metric, then to the system's default.
pub fn evaluate(file: &MetricFile, opts: &EvaluateOptions, registry: &Registry) -> Result<Evaluation> {
    if let Some(name) = &opts.system {
        if name != &file.system {
            return Err(CliError::Config(format!(
                "metric file is for system {:?}, not {name:?}",
                file.system
            )));
        }
    }
    let case = registry.build(&file.system, &file.params)?;
    let metric = file.metric()?;
    if metric.dim() != case.dim() {
        return Err(CliError::Config(format!(
            "metric has dimension {}, {} has dimension {}",
            metric.dim(),
            case.name,
            case.dim()
        )));
    }
    resent_core::objective::check_degree_for_domain(&case.domain, metric.basis().degree())?;
    let stored = file.grid.as_ref().map(GridConfig::from);
    let counts = opts
        .grid
        .clone()
        .or_else(|| stored.as_ref().map(|g| g.counts.clone()))
        .unwrap_or_else(|| case.defaults.grid.clone());
    let refine = opts.refine.or_else(|| stored.as_ref().map(|g| g.refine)).unwrap_or(true);
    let grid = GridConfig { counts, refine };
    let workers = config::workers(opts.workers)?;
    let inner = maximize(&case, &metric, &grid, &workers)?;
    Ok(Evaluation {
        system: case.name.clone(),
        value: value_to_entropy(&case, inner.value),
        x_star: inner.x_star,
        k_star: inner.k_star,
        gap_ok: inner.gap_ok,
        grid: (&grid).into(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub system: String,
    #[serde(flatten)]
    pub values: ReferenceValues,
}

/// Closed-form entropy or bounds of a system.
pub fn bounds(system: &str, params: &SystemParams, registry: &Registry) -> Result<Bounds> {
    let case = registry.build(system, params)?;
    if case.reference.is_empty() {
        return Err(CliError::Config(format!("no closed-form reference values for {system}")));
    }
    Ok(Bounds { system: case.name, values: case.reference })
}
