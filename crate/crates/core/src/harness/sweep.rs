use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::output::evaluate;
use super::report::BoundReport;
use super::scenario::Scenario;
use crate::{par, Error, Result};

/// Largest number of grid points a sweep may expand to.
pub const MAX_SWEEP_POINTS: usize = 4096;

/// One swept config path and its values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub path: String,
    pub values: Vec<serde_json::Value>,
}

impl SweepAxis {
    /// Parses `path=v1,v2,...`; each value is read as JSON, falling back to a string.
    pub fn parse(spec: &str) -> Result<Self> {
        let (path, rest) = spec
            .split_once('=')
            .ok_or_else(|| Error::param("grid", format!("expected path=v1,v2,... (got {spec:?})")))?;
        let path = path.trim();
        if path.is_empty() {
            return Err(Error::param("grid", "empty path"));
        }
        let values = rest
            .split(',')
            .map(str::trim)
            .filter(|v| !v.is_empty())
            .map(|v| serde_json::from_str(v).unwrap_or_else(|_| serde_json::Value::String(v.to_string())))
            .collect();
        Ok(SweepAxis {
            path: path.to_string(),
            values,
        })
    }
}

/// A point of the grid: its id, overrides and outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub id: String,
    pub overrides: BTreeMap<String, serde_json::Value>,
    pub report: Option<BoundReport>,
    pub error: Option<String>,
}

/// Aggregates over all points that ran.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub points: Vec<SweepPoint>,
    /// Largest light-cone constant across points, with the point id.
    pub max_thm2_c: Option<(String, f64)>,
    /// `S⁺(α)` per point, keyed by point id then `α`.
    pub transport: BTreeMap<String, BTreeMap<String, f64>>,
    pub failures: usize,
    pub errors: usize,
    pub warnings: Vec<String>,
}

impl SweepSummary {
    pub fn any_failure(&self) -> bool {
        self.failures > 0 || self.errors > 0
    }
}

/// Expands the cartesian product of `axes` over `base`.
pub fn expand_grid(base: &Scenario, axes: &[SweepAxis]) -> Result<Vec<(String, BTreeMap<String, serde_json::Value>)>> {
    let mut total: usize = 1;
    for a in axes {
        total = total.saturating_mul(a.values.len());
    }
    if total > MAX_SWEEP_POINTS {
        return Err(Error::param(
            "grid",
            format!("{total} points exceed the cap of {MAX_SWEEP_POINTS}"),
        ));
    }
    if axes.is_empty() {
        return Ok(Vec::new());
    }
    let mut out = Vec::with_capacity(total);
    for k in 0..total {
        let mut rem = k;
        let mut overrides = BTreeMap::new();
        for a in axes.iter().rev() {
            let n = a.values.len();
            overrides.insert(a.path.clone(), a.values[rem % n].clone());
            rem /= n;
        }
        out.push((format!("{}-p{k}", base.id), overrides));
    }
    Ok(out)
}

fn run_point(base: &Scenario, id: &str, overrides: &BTreeMap<String, serde_json::Value>) -> Result<BoundReport> {
    let mut s = base.clone();
    for (path, value) in overrides {
        s = s.with_override(path, value)?;
    }
    s.id = id.to_string();
    s.output = None;
    Ok(evaluate(&s)?.report)
}

/// Runs every grid point; a failing point is recorded and does not stop the others.
pub fn run_sweep(base: &Scenario, axes: &[SweepAxis]) -> Result<SweepSummary> {
    base.validate()?;
    let grid = expand_grid(base, axes)?;
    let mut warnings = Vec::new();
    if grid.is_empty() {
        warnings.push("sweep grid is empty; nothing was run".to_string());
    }
    let results = par::map(&grid, |(id, ov)| run_point(base, id, ov));
    let mut points = Vec::with_capacity(grid.len());
    let mut max_thm2_c: Option<(String, f64)> = None;
    let mut transport = BTreeMap::new();
    let (mut failures, mut errors) = (0, 0);
    for ((id, overrides), res) in grid.into_iter().zip(results) {
        match res {
            Ok(report) => {
                failures += usize::from(report.any_failure());
                if let Some(c) = report.outcome("thm2").and_then(|o| o.metrics.get("smallest_c")) {
                    if max_thm2_c.as_ref().map_or(true, |(_, m)| *c > *m) {
                        max_thm2_c = Some((id.clone(), *c));
                    }
                }
                if let Some(o) = report.outcome("transport") {
                    let row: BTreeMap<String, f64> = o
                        .metrics
                        .iter()
                        .filter_map(|(k, v)| k.strip_prefix("s_plus_").map(|a| (a.to_string(), *v)))
                        .collect();
                    transport.insert(id.clone(), row);
                }
                points.push(SweepPoint {
                    id,
                    overrides,
                    report: Some(report),
                    error: None,
                });
            }
            Err(e) => {
                errors += 1;
                points.push(SweepPoint {
                    id,
                    overrides,
                    report: None,
                    error: Some(e.to_string()),
                });
            }
        }
    }
    Ok(SweepSummary {
        points,
        max_thm2_c,
        transport,
        failures,
        errors,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
id = "sw"

[kernel]
family = "laplacian"
geometry = { dimension = 1, half_width = 30 }

[time]
t_final = 3.0
step = 0.5

[[checks]]
kind = "thm2"
v = 3.0
window = [1.0, 3.0]
"#;

    #[test]
    fn parses_axis_values() {
        let a = SweepAxis::parse("checks.0.v=2.5, 3,abc").unwrap();
        assert_eq!(a.path, "checks.0.v");
        assert_eq!(a.values, vec![serde_json::json!(2.5), serde_json::json!(3), serde_json::json!("abc")]);
        assert!(SweepAxis::parse("novalue").is_err());
    }

    #[test]
    fn grid_is_cartesian_and_capped() {
        let base = Scenario::from_toml(BASE).unwrap();
        let axes = vec![SweepAxis::parse("checks.0.v=3,4").unwrap(), SweepAxis::parse("time.step=0.5,0.25,1").unwrap()];
        let g = expand_grid(&base, &axes).unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!(g[0].0, "sw-p0");
        assert_eq!(g[1].1["time.step"], serde_json::json!(0.25));
        let big = SweepAxis {
            path: "checks.0.v".into(),
            values: vec![serde_json::json!(3); 65],
        };
        assert!(expand_grid(&base, &[big.clone(), big]).is_err());
    }

    #[test]
    fn bad_points_are_isolated() {
        let base = Scenario::from_toml(BASE).unwrap();
        let axes = vec![SweepAxis::parse("checks.0.v=3,1.5").unwrap()];
        let s = run_sweep(&base, &axes).unwrap();
        assert_eq!(s.points.len(), 2);
        assert!(s.points[0].report.is_some());
        assert!(s.points[1].error.as_ref().unwrap().contains("κ"));
        assert_eq!(s.errors, 1);
        assert_eq!(s.max_thm2_c.as_ref().unwrap().0, "sw-p0");
    }

    #[test]
    fn empty_grid_warns() {
        let base = Scenario::from_toml(BASE).unwrap();
        let s = run_sweep(&base, &[]).unwrap();
        assert!(s.points.is_empty());
        assert_eq!(s.warnings.len(), 1);
    }
}
