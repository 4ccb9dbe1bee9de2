//! Randomized property suites and independent numerical oracles.
//!
//! Every suite returns a [`Report`] instead of panicking so that the same
//! checks can back both ordinary tests and the acceptance run.

pub mod gen;
pub mod geometry;
pub mod objective;
pub mod oracle;
pub mod subgradient;

use std::fmt;
use std::time::{Duration, Instant};

/// Outcome of one randomized suite.
#[derive(Debug, Clone)]
pub struct Report {
    pub name: String,
    pub checked: usize,
    pub violations: usize,
    /// Largest error seen, in the units of the suite's tolerance.
    pub worst: f64,
    pub tolerance: f64,
    pub elapsed: Duration,
    /// First violation, if any.
    pub example: Option<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.checked > 0
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} checks, {} violations, worst {:.3e} (tol {:.1e}), {:.2?}",
            self.name, self.checked, self.violations, self.worst, self.tolerance, self.elapsed
        )?;
        if let Some(e) = &self.example {
            write!(f, "; first violation: {e}")?;
        }
        Ok(())
    }
}

/// Accumulates error measurements against a tolerance.
pub(crate) struct Tally {
    name: String,
    tolerance: f64,
    checked: usize,
    violations: usize,
    worst: f64,
    example: Option<String>,
    start: Instant,
}

impl Tally {
    pub(crate) fn new(name: impl Into<String>, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            tolerance,
            checked: 0,
            violations: 0,
            worst: 0.0,
            example: None,
            start: Instant::now(),
        }
    }

    /// Records `err`; a violation when it exceeds the tolerance or is NaN.
    pub(crate) fn record(&mut self, err: f64, context: impl FnOnce() -> String) {
        self.checked += 1;
        if err.is_nan() || err > self.tolerance {
            self.violations += 1;
            if self.example.is_none() {
                self.example = Some(format!("{} (error {err:.3e})", context()));
            }
        }
        if err > self.worst || err.is_nan() {
            self.worst = err;
        }
    }

    pub(crate) fn fail(&mut self, context: String) {
        self.checked += 1;
        self.violations += 1;
        if self.example.is_none() {
            self.example = Some(context);
        }
    }

    pub(crate) fn finish(self) -> Report {
        Report {
            name: self.name,
            checked: self.checked,
            violations: self.violations,
            worst: self.worst,
            tolerance: self.tolerance,
            elapsed: self.start.elapsed(),
            example: self.example,
        }
    }
}
