//! Scenario configs, check runners, reports and on-disk outputs.

mod checks;
mod output;
mod report;
mod scenario;
mod sweep;

pub use checks::{dense_propagator_column, floor_flag, run_check, CheckContext, CheckRun, ProfileRow, Series};
pub use output::{
    evaluate, load_report, loglog_svg, run_scenario, simulate, write_outputs, Curve, Emit, Evaluation, ManifestEntry,
    OutputManifest, ScenarioRun, DECAY_FILE, OUTPUT_MANIFEST_FILE, PLOT_FILE, REPORT_FILE, RESIDUALS_FILE,
    RESIDUAL_PLOT_FILE, TAILS_FILE,
};
pub use report::{BoundReport, CheckOutcome, Fingerprint, FitSummary, Verdict};
pub use scenario::{Check, InitialState, Scenario, TimeGrid, Window};
pub use sweep::{expand_grid, run_sweep, SweepAxis, SweepPoint, SweepSummary, MAX_SWEEP_POINTS};
