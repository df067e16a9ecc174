use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Outcome of one requested check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Every value in the window sits below the numerical floor; counts as a pass.
    BelowFloor,
    /// Measured and reported without a pass/fail claim.
    DiagnosticOnly,
}

impl Verdict {
    pub fn is_failure(self) -> bool {
        self == Verdict::Fail
    }

    pub fn name(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::BelowFloor => "below_floor",
            Verdict::DiagnosticOnly => "diagnostic_only",
        }
    }
}

/// A regression summary carried into reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub label: String,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub points: usize,
}

/// Result of one check with its headline numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub check: String,
    pub verdict: Verdict,
    pub summary: String,
    pub metrics: BTreeMap<String, f64>,
    pub fits: Vec<FitSummary>,
}

impl CheckOutcome {
    pub fn new(check: &str, verdict: Verdict, summary: impl Into<String>) -> Self {
        CheckOutcome {
            check: check.to_string(),
            verdict,
            summary: summary.into(),
            metrics: BTreeMap::new(),
            fits: Vec::new(),
        }
    }

    pub fn metric(mut self, name: &str, value: f64) -> Self {
        self.metrics.insert(name.to_string(), value);
        self
    }

    pub fn fit(mut self, fit: FitSummary) -> Self {
        self.fits.push(fit);
        self
    }
}

/// Where and how a report was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub crate_version: String,
    pub os: String,
    pub arch: String,
    pub parallel: bool,
    pub threads: usize,
    pub debug_build: bool,
}

impl Fingerprint {
    pub fn current() -> Self {
        Fingerprint {
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
            parallel: crate::par::is_parallel(),
            threads: crate::par::thread_count(),
            debug_build: cfg!(debug_assertions),
        }
    }
}

/// Per-scenario verdicts, one entry per requested check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub scenario_id: String,
    pub scenario_hash: String,
    /// `κ` and `M₂` of the kernel on the box.
    pub kappa: f64,
    /// `max_t |‖u_t‖ - 1|` when a trajectory was run.
    pub norm_drift: Option<f64>,
    pub checks: Vec<CheckOutcome>,
    pub environment: Fingerprint,
}

impl BoundReport {
    pub fn any_failure(&self) -> bool {
        self.checks.iter().any(|c| c.verdict.is_failure())
    }

    pub fn outcome(&self, check: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.check == check)
    }

    /// One line per check.
    pub fn summary_lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| format!("{:<14} {:<16} {}", c.check, c.verdict.name(), c.summary))
            .collect()
    }
}
