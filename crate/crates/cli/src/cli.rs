//! Command-line definitions and dispatch.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use resent_core::systems::{Registry, SystemParams};

use crate::commands::{self, EvaluateOptions};
use crate::config::{ConfigFile, StepRuleSpec};
use crate::error::{CliError, Result};
use crate::metric_file::MetricFile;

#[derive(Debug, Parser)]
#[command(name = "resent", version, about = "Upper bounds on restoration entropy via conformal metrics")]
pub struct Cli {
    /// Log progress to standard error (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the subgradient optimizer and write iterations.csv,
    /// best_metric.json, summary.json and convergence.svg.
    Run(RunArgs),
    /// Evaluate the entropy estimate of a stored metric.
    Evaluate(EvaluateArgs),
    /// Print closed-form entropy values or bounds of a system.
    Bounds(BoundsArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    /// Bouncing ball damping.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Bouncing ball forcing amplitude.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Lorenz σ.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Lorenz ρ.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Lorenz β.
    #[arg(long)]
    pub beta: Option<f64>,
}

impl ParamArgs {
    fn params(&self) -> SystemParams {
        SystemParams { gamma: self.gamma, delta: self.delta, sigma: self.sigma, rho: self.rho, beta: self.beta }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON config file; flags override its fields.
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub system: Option<String>,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Maximal degree of the conformal polynomial.
    #[arg(long)]
    pub degree: Option<usize>,
    /// Include the constant monomial in the polynomial basis.
    #[arg(long)]
    pub include_constant: bool,
    /// Grid points per axis, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<usize>>,
    /// Skip the refinement pass of the inner maximization.
    #[arg(long)]
    pub no_refine: bool,
    /// Step rule numerator `a` in `θ_k = a / (k + b)`.
    #[arg(long)]
    pub step_a: Option<f64>,
    /// Step rule offset `b` in `θ_k = a / (k + b)`.
    #[arg(long)]
    pub step_b: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Worker threads for the grid scan (default: all cores).
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(short, long)]
    pub output_dir: Option<PathBuf>,
}

impl RunArgs {
    /// The flags as a config layer.
    pub fn overrides(&self) -> ConfigFile {
        let step_rule = match (self.step_a, self.step_b) {
            (None, None) => None,
            (a, b) => Some(StepRuleSpec { a, b }),
        };
        ConfigFile {
            system: self.system.clone(),
            params: self.params.params(),
            degree: self.degree,
            include_constant: self.include_constant.then_some(true),
            grid: self.grid.clone(),
            refine: self.no_refine.then_some(false),
            step_rule,
            max_iters: self.max_iters,
            initial: None,
            workers: self.workers,
            output_dir: self.output_dir.clone(),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    /// Metric file as written by `run` (best_metric.json).
    pub metric: PathBuf,
    /// Expected system; must match the metric file.
    #[arg(long)]
    pub system: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<usize>>,
    #[arg(long)]
    pub no_refine: bool,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    pub system: String,
    #[command(flatten)]
    pub params: ParamArgs,
}

/// Executes a parsed command line, writing results to `out`.
pub fn execute(cli: &Cli, registry: &Registry, out: &mut impl Write) -> Result<()> {
    match &cli.command {
        Command::Run(args) => {
            let base = match &args.config {
                Some(path) => ConfigFile::load(path)?,
                None => ConfigFile::default(),
            };
            let resolved = crate::config::resolve(&base.merged(args.overrides()), registry)?;
            let summary = commands::run(&resolved)?;
            print_json(out, &summary)
        }
        Command::Evaluate(args) => {
            let file = MetricFile::load(&args.metric)?;
            let opts = EvaluateOptions {
                system: args.system.clone(),
                grid: args.grid.clone(),
                refine: args.no_refine.then_some(false),
                workers: args.workers,
            };
            print_json(out, &commands::evaluate(&file, &opts, registry)?)
        }
        Command::Bounds(args) => print_json(out, &commands::bounds(&args.system, &args.params.params(), registry)?),
    }
}

fn print_json<T: serde::Serialize>(out: &mut impl Write, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::output("stdout", std::io::Error::other(e)))?;
    writeln!(out, "{text}").map_err(|e| CliError::output("stdout", e))
}
