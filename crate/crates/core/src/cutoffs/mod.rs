//! Smooth bumps `w`, smoothed steps `χ = c∫w²` and the adiabatic space-time
//! localization fields `f((φ - v̄t^α)/s^α)` built from them.

mod astlo;
mod bump;
mod jet;
mod step;

pub use astlo::{
    astlo_field, astlo_field_with_s, sandwich_check, window_check, AstloParams, SandwichReport, Schedule,
    WindowReport,
};
pub use bump::{make_bump, BumpFunction};
pub use jet::{Jet, JET_LEN};
pub use step::{make_step, CutoffSpec, SmoothedStep, STEP_PANELS};
