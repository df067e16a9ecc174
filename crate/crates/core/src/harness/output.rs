use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::checks::{floor_flag, run_check, CheckContext, CheckRun, ProfileRow, Series};
use super::report::{BoundReport, Fingerprint};
use super::scenario::Scenario;
use crate::dynamics::{evolve, evolve_nls, hex, write_atomic, Trajectory};
use crate::operators::structural_constants;
use crate::{Error, Result};

pub const REPORT_FILE: &str = "report.json";
pub const TAILS_FILE: &str = "tails.csv";
pub const RESIDUALS_FILE: &str = "residuals.csv";
pub const DECAY_FILE: &str = "decay.csv";
pub const PLOT_FILE: &str = "plot.svg";
pub const RESIDUAL_PLOT_FILE: &str = "residuals.svg";
pub const OUTPUT_MANIFEST_FILE: &str = "manifest.json";

/// Which artifacts to write next to the always-present manifest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Emit {
    pub json: bool,
    pub csv: bool,
    pub svg: bool,
}

impl Default for Emit {
    fn default() -> Self {
        Emit {
            json: true,
            csv: true,
            svg: true,
        }
    }
}

impl Emit {
    pub fn none() -> Self {
        Emit {
            json: false,
            csv: false,
            svg: false,
        }
    }
}

/// A scenario's report plus the raw series behind it.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub report: BoundReport,
    pub runs: Vec<CheckRun>,
}

impl Evaluation {
    pub fn series(&self) -> impl Iterator<Item = &Series> {
        self.runs.iter().flat_map(|r| r.series.iter())
    }
}

/// Simulates (when a check needs it) and runs every check in memory.
pub fn evaluate(scenario: &Scenario) -> Result<Evaluation> {
    scenario.validate()?;
    let kernel = scenario.kernel.build()?;
    let kappa = structural_constants(&kernel, 1)?.kappa;
    let trajectory = if scenario.checks.iter().any(|c| c.needs_trajectory()) {
        Some(simulate(scenario)?)
    } else {
        None
    };
    let norm_drift = trajectory.as_ref().map(|tr| {
        tr.snapshots
            .iter()
            .map(|s| (s.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    });
    let ctx = CheckContext {
        scenario,
        kernel: &kernel,
        kappa,
        trajectory: trajectory.as_ref(),
    };
    let runs: Vec<CheckRun> = scenario
        .checks
        .iter()
        .map(|c| run_check(&ctx, c))
        .collect::<Result<_>>()?;
    let report = BoundReport {
        scenario_id: scenario.id.clone(),
        scenario_hash: scenario.hash()?,
        kappa,
        norm_drift,
        checks: runs.iter().map(|r| r.outcome.clone()).collect(),
        environment: Fingerprint::current(),
    };
    Ok(Evaluation { report, runs })
}

/// Evolves the scenario's initial state over its time grid.
pub fn simulate(scenario: &Scenario) -> Result<Trajectory> {
    let kernel = scenario.kernel.build()?;
    let u0 = scenario.initial.build(&kernel)?;
    let times = scenario.time.times();
    let mut settings = scenario.integrator.clone();
    if scenario.checks.iter().any(|c| c.name() == "nls") {
        settings.record_steps = true;
    }
    match &scenario.nonlinearity {
        Some(nl) => evolve_nls(&kernel, &scenario.potential, nl, &u0, &times, &settings),
        None => evolve(&kernel, &scenario.potential, &u0, &times, &settings),
    }
}

/// One file listed in `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputManifest {
    pub scenario_id: String,
    pub scenario_hash: String,
    pub files: Vec<ManifestEntry>,
}

/// Report plus the files that were written.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub evaluation: Evaluation,
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
}

/// Evaluates the scenario and writes its artifacts under `scenario.output_dir(root)`.
pub fn run_scenario(scenario: &Scenario, root: &Path, emit: Emit) -> Result<ScenarioRun> {
    let evaluation = evaluate(scenario)?;
    let dir = scenario.output_dir(root);
    let files = write_outputs(&evaluation, &dir, emit)?;
    Ok(ScenarioRun { evaluation, dir, files })
}

/// Writes the selected artifacts and a manifest into `dir`.
pub fn write_outputs(evaluation: &Evaluation, dir: &Path, emit: Emit) -> Result<Vec<PathBuf>> {
    let mut written: Vec<(String, Vec<u8>)> = Vec::new();
    if emit.json {
        written.push((REPORT_FILE.into(), serde_json::to_vec_pretty(&evaluation.report)?));
    }
    if emit.csv {
        written.push((TAILS_FILE.into(), tails_csv(evaluation)?));
        let residuals: Vec<&ProfileRow> = evaluation.runs.iter().flat_map(|r| &r.residuals).collect();
        if !residuals.is_empty() {
            written.push((RESIDUALS_FILE.into(), profile_csv(&evaluation.report.scenario_id, "sigma", &residuals)?));
        }
        let decay: Vec<&ProfileRow> = evaluation.runs.iter().flat_map(|r| &r.decay).collect();
        if !decay.is_empty() {
            written.push((DECAY_FILE.into(), profile_csv(&evaluation.report.scenario_id, "separation", &decay)?));
        }
    }
    if emit.svg {
        let curves: Vec<Curve> = evaluation
            .series()
            .map(|s| Curve {
                label: s.name.clone(),
                points: s.times.iter().copied().zip(s.values.iter().copied()).collect(),
            })
            .collect();
        if let Some(svg) = loglog_svg(&evaluation.report.scenario_id, "t", "value", &curves) {
            written.push((PLOT_FILE.into(), svg.into_bytes()));
        }
        let mut residual_curves: Vec<Curve> = Vec::new();
        for row in evaluation.runs.iter().flat_map(|r| &r.residuals) {
            if row.quantity == "gap_max_eigenvalue" {
                continue;
            }
            match residual_curves.iter_mut().find(|c| c.label == row.quantity) {
                Some(c) => c.points.push((row.x, row.value)),
                None => residual_curves.push(Curve {
                    label: row.quantity.clone(),
                    points: vec![(row.x, row.value)],
                }),
            }
        }
        if let Some(svg) = loglog_svg(&evaluation.report.scenario_id, "sigma", "norm", &residual_curves) {
            written.push((RESIDUAL_PLOT_FILE.into(), svg.into_bytes()));
        }
    }
    let mut paths = Vec::new();
    let mut entries = Vec::new();
    for (name, bytes) in &written {
        let path = dir.join(name);
        write_atomic(&path, bytes)?;
        entries.push(ManifestEntry {
            file: name.clone(),
            sha256: hex(&Sha256::digest(bytes)),
            bytes: bytes.len(),
        });
        paths.push(path);
    }
    let manifest = OutputManifest {
        scenario_id: evaluation.report.scenario_id.clone(),
        scenario_hash: evaluation.report.scenario_hash.clone(),
        files: entries,
    };
    let path = dir.join(OUTPUT_MANIFEST_FILE);
    write_atomic(&path, &serde_json::to_vec_pretty(&manifest)?)?;
    paths.push(path);
    Ok(paths)
}

/// Reads a `report.json` written by [`write_outputs`].
pub fn load_report(path: &Path) -> Result<BoundReport> {
    let bytes = std::fs::read(path)?;
    serde_json::from_slice(&bytes).map_err(Error::from)
}

#[derive(Serialize)]
struct TailRow<'a> {
    scenario_id: &'a str,
    series: &'a str,
    t: f64,
    threshold: Option<f64>,
    value: f64,
    floor: bool,
}

fn tails_csv(evaluation: &Evaluation) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let id = evaluation.report.scenario_id.as_str();
    let mut any = false;
    for s in evaluation.series() {
        for i in 0..s.times.len() {
            any = true;
            w.serialize(TailRow {
                scenario_id: id,
                series: &s.name,
                t: s.times[i],
                threshold: s.thresholds[i],
                value: s.values[i],
                floor: floor_flag(s.values[i]),
            })?;
        }
    }
    if !any {
        w.write_record(["scenario_id", "series", "t", "threshold", "value", "floor"])?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn profile_csv(id: &str, x_name: &str, rows: &[&ProfileRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["scenario_id", "quantity", x_name, "value"])?;
    for r in rows {
        w.write_record([id, r.quantity.as_str(), &r.x.to_string(), &r.value.to_string()])?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// A labelled curve for [`loglog_svg`].
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

/// Log-log line plot; points with a non-positive coordinate or a value below
/// the floor are dropped. Returns `None` when nothing is plottable.
pub fn loglog_svg(title: &str, x_label: &str, y_label: &str, curves: &[Curve]) -> Option<String> {
    let kept: Vec<(&str, Vec<(f64, f64)>)> = curves
        .iter()
        .map(|c| {
            let pts = c
                .points
                .iter()
                .filter(|&&(x, y)| x > 0.0 && y > 0.0 && !floor_flag(y) && x.is_finite() && y.is_finite())
                .map(|&(x, y)| (x.log10(), y.log10()))
                .collect::<Vec<_>>();
            (c.label.as_str(), pts)
        })
        .filter(|(_, p)| !p.is_empty())
        .collect();
    if kept.is_empty() {
        return None;
    }
    let all = kept.iter().flat_map(|(_, p)| p.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let (x0, x1) = (x0.floor(), x1.ceil().max(x0.floor() + 1.0));
    let (y0, y1) = (y0.floor(), y1.ceil().max(y0.floor() + 1.0));
    let (w, h, ml, mr, mt, mb) = (720.0, 480.0, 70.0, 190.0, 40.0, 50.0);
    let px = |x: f64| ml + (x - x0) / (x1 - x0) * (w - ml - mr);
    let py = |y: f64| h - mb - (y - y0) / (y1 - y0) * (h - mt - mb);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" font-size="14">{}</text>"#, ml, escape(title));
    let _ = writeln!(
        s,
        r##"<rect x="{ml}" y="{mt}" width="{}" height="{}" fill="none" stroke="#333"/>"##,
        w - ml - mr,
        h - mt - mb
    );
    for k in (x0 as i64)..=(x1 as i64) {
        let x = px(k as f64);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.1}" y1="{mt}" x2="{x:.1}" y2="{}" stroke="#ddd"/><text x="{x:.1}" y="{}" text-anchor="middle">1e{k}</text>"##,
            h - mb,
            h - mb + 16.0
        );
    }
    for k in (y0 as i64)..=(y1 as i64) {
        let y = py(k as f64);
        let _ = writeln!(
            s,
            r##"<line x1="{ml}" y1="{y:.1}" x2="{}" y2="{y:.1}" stroke="#ddd"/><text x="{}" y="{:.1}" text-anchor="end">1e{k}</text>"##,
            w - mr,
            ml - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#,
        (ml + w - mr) / 2.0,
        h - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.1}" transform="rotate(-90 16 {:.1})" text-anchor="middle">{}</text>"#,
        (mt + h - mb) / 2.0,
        (mt + h - mb) / 2.0,
        escape(y_label)
    );
    for (i, (label, pts)) in kept.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.1},{:.1}", px(x), py(y))).collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            coords.join(" ")
        );
        let ly = mt + 14.0 + 18.0 * i as f64;
        let lx = w - mr + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 18.0,
            lx + 24.0,
            ly + 4.0,
            escape(label)
        );
    }
    s.push_str("</svg>\n");
    Some(s)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Verdict;

    const SCENARIO: &str = r#"
id = "out-test"

[kernel]
family = "laplacian"
geometry = { dimension = 1, half_width = 40 }

[time]
t_final = 4.0
step = 0.5

[[checks]]
kind = "radin_simon"

[[checks]]
kind = "thm2"
v = 3.0
window = [1.0, 4.0]
"#;

    #[test]
    fn evaluate_runs_requested_checks() {
        let s = Scenario::from_toml(SCENARIO).unwrap();
        let ev = evaluate(&s).unwrap();
        assert_eq!(ev.report.checks.len(), 2);
        assert_eq!(ev.report.outcome("radin_simon").unwrap().verdict, Verdict::Pass);
        assert!(ev.report.norm_drift.unwrap() < 1e-8);
        assert!((ev.report.kappa - 2.0).abs() < 1e-12);
    }

    #[test]
    fn writes_manifest_with_hashes() {
        let dir = tempfile::tempdir().unwrap();
        let s = Scenario::from_toml(SCENARIO).unwrap();
        let run = run_scenario(&s, dir.path(), Emit::default()).unwrap();
        let manifest: OutputManifest =
            serde_json::from_slice(&std::fs::read(run.dir.join(OUTPUT_MANIFEST_FILE)).unwrap()).unwrap();
        assert_eq!(manifest.scenario_hash, s.hash().unwrap());
        for e in &manifest.files {
            let bytes = std::fs::read(run.dir.join(&e.file)).unwrap();
            assert_eq!(hex(&Sha256::digest(&bytes)), e.sha256);
        }
        assert!(manifest.files.iter().any(|e| e.file == TAILS_FILE));
        let back = load_report(&run.dir.join(REPORT_FILE)).unwrap();
        assert_eq!(back, run.evaluation.report);
    }

    #[test]
    fn tails_csv_has_floor_column() {
        let s = Scenario::from_toml(SCENARIO).unwrap();
        let ev = evaluate(&s).unwrap();
        let text = String::from_utf8(tails_csv(&ev).unwrap()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "scenario_id,series,t,threshold,value,floor");
        // at t = 0 the delta state has no mass outside the ball
        assert!(text.contains("out-test,thm2_tail,0.0,0.0,0.0,true"));
    }

    #[test]
    fn svg_skips_floor_values() {
        let c = Curve {
            label: "a<b".into(),
            points: vec![(1.0, 1e-20), (2.0, 0.1), (4.0, 0.01)],
        };
        let svg = loglog_svg("t", "x", "y", &[c]).unwrap();
        assert!(svg.contains("a&lt;b"));
        assert_eq!(svg.matches("<polyline").count(), 1);
        let empty = Curve {
            label: "z".into(),
            points: vec![(1.0, 0.0)],
        };
        assert!(loglog_svg("t", "x", "y", &[empty]).is_none());
    }
}
