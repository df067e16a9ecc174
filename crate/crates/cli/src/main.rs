use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use latdyn::dynamics::{export_trajectory, write_atomic};
use latdyn::harness::{self, BoundReport, Emit, Scenario, SweepAxis};

const EXIT_FAIL: u8 = 2;
const EXIT_INVALID: u8 = 3;
const EXIT_PREFLIGHT: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "latdyn", version, about = "Lattice Schrödinger dynamics: light cones, commutator expansions, resolvent checks")]
struct Cli {
    /// Output root; each scenario writes into `<out>/<id>` unless its config says otherwise.
    #[arg(long, global = true, env = "LATDYN_OUT", default_value = "latdyn-out")]
    out: PathBuf,

    /// Artifacts to write (repeatable); defaults to all three.
    #[arg(long, global = true, value_enum)]
    emit: Vec<EmitKind>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EmitKind {
    Svg,
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evolve the initial state and export the trajectory.
    Simulate { config: PathBuf },
    /// Run every check in the config.
    Bounds { config: PathBuf },
    /// Run only the commutator-expansion checks.
    Expansion { config: PathBuf },
    /// Run only the resolvent checks (Combes–Thomas, Dunford).
    Spectral { config: PathBuf },
    /// Run the config over a parameter grid.
    Sweep {
        config: PathBuf,
        /// `dotted.path=v1,v2,...`; repeat for a cartesian product.
        #[arg(long = "grid", required = false)]
        grid: Vec<String>,
    },
    /// Print a previously written report.json.
    Report { path: PathBuf },
}

fn emit_of(kinds: &[EmitKind]) -> Emit {
    if kinds.is_empty() {
        return Emit::default();
    }
    Emit {
        json: kinds.contains(&EmitKind::Json),
        csv: kinds.contains(&EmitKind::Csv),
        svg: kinds.contains(&EmitKind::Svg),
    }
}

fn load(path: &Path) -> anyhow::Result<Scenario> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Scenario::from_toml(&text)?)
}

fn restrict(mut scenario: Scenario, kinds: &[&str], what: &str) -> anyhow::Result<Scenario> {
    scenario.checks.retain(|c| kinds.contains(&c.name()));
    if scenario.checks.is_empty() {
        return Err(latdyn::Error::Validation {
            path: "checks".into(),
            message: format!("config requests no {what} checks"),
        }
        .into());
    }
    Ok(scenario)
}

fn print_report(report: &BoundReport) -> u8 {
    println!("scenario {} ({})", report.scenario_id, &report.scenario_hash[..12]);
    println!("kappa = {}", report.kappa);
    if let Some(d) = report.norm_drift {
        println!("norm drift = {d:.3e}");
    }
    for line in report.summary_lines() {
        println!("  {line}");
    }
    if report.any_failure() {
        EXIT_FAIL
    } else {
        0
    }
}

fn run_checks(cli: &Cli, scenario: &Scenario) -> anyhow::Result<u8> {
    let run = harness::run_scenario(scenario, &cli.out, emit_of(&cli.emit))?;
    let code = print_report(&run.evaluation.report);
    println!("wrote {} files to {}", run.files.len(), run.dir.display());
    Ok(code)
}

fn run(cli: &Cli) -> anyhow::Result<u8> {
    match &cli.command {
        Command::Simulate { config } => {
            let scenario = load(config)?;
            let tr = harness::simulate(&scenario)?;
            let dir = scenario.output_dir(&cli.out).join("trajectory");
            let manifest = export_trajectory(&tr, &dir)?;
            let drift = tr
                .snapshots
                .iter()
                .map(|s| (s.norm() - 1.0).abs())
                .fold(0.0, f64::max);
            println!(
                "{} snapshots, {} accepted steps, norm drift {drift:.3e}",
                tr.snapshots.len(),
                tr.log.accepted_steps
            );
            println!("wrote {}", manifest.display());
            Ok(0)
        }
        Command::Bounds { config } => run_checks(cli, &load(config)?),
        Command::Expansion { config } => run_checks(cli, &restrict(load(config)?, &["expansion"], "expansion")?),
        Command::Spectral { config } => run_checks(
            cli,
            &restrict(load(config)?, &["combes_thomas", "dunford"], "spectral")?,
        ),
        Command::Sweep { config, grid } => {
            let scenario = load(config)?;
            let axes = grid
                .iter()
                .map(|g| SweepAxis::parse(g))
                .collect::<latdyn::Result<Vec<_>>>()?;
            let summary = harness::run_sweep(&scenario, &axes)?;
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            for p in &summary.points {
                match (&p.report, &p.error) {
                    (Some(r), _) => {
                        let verdicts: Vec<String> =
                            r.checks.iter().map(|c| format!("{}={}", c.check, c.verdict.name())).collect();
                        println!("{:<16} {}", p.id, verdicts.join(" "));
                    }
                    (None, Some(e)) => println!("{:<16} error: {e}", p.id),
                    (None, None) => {}
                }
            }
            if let Some((id, c)) = &summary.max_thm2_c {
                println!("max thm2 C = {c:.4e} at {id}");
            }
            for (id, row) in &summary.transport {
                let cells: Vec<String> = row.iter().map(|(a, s)| format!("S+({a})={s:.2}")).collect();
                println!("{id:<16} {}", cells.join(" "));
            }
            if emit_of(&cli.emit).json {
                let path = scenario.output_dir(&cli.out).join("sweep.json");
                write_atomic(&path, &serde_json::to_vec_pretty(&summary)?)?;
                println!("wrote {}", path.display());
            }
            Ok(if summary.any_failure() { EXIT_FAIL } else { 0 })
        }
        Command::Report { path } => {
            if !path.exists() {
                bail!("no report at {}", path.display());
            }
            Ok(print_report(&harness::load_report(path)?))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<latdyn::Error>() {
        Some(
            latdyn::Error::Validation { .. }
            | latdyn::Error::Toml(_)
            | latdyn::Error::Parameter { .. }
            | latdyn::Error::Geometry(_)
            | latdyn::Error::Summability { .. },
        ) => EXIT_INVALID,
        Some(latdyn::Error::Preflight { .. }) => EXIT_PREFLIGHT,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
