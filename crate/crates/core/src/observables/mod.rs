//! Outside probabilities, moments, light-cone and transport fits, the front
//! condition, ASTLO monotonicity residuals and dyadic moment bounds.

mod dyadic;
mod fit;
mod front;
mod lightcone;
mod monotonicity;
mod tails;

pub use dyadic::{dyadic_moment_bound, DyadicPoint, DyadicReport};
pub use fit::{fit_decay, fit_line, ExponentFit, LineFit};
pub use front::{front_condition, radin_simon_check, FrontDiagnostic, RadinSimonReport};
pub use lightcone::{
    lightcone_report, transport_exponents, LightconeReport, TransportEntry, TransportReport, TRANSPORT_FINITE_CAP,
};
pub use monotonicity::{astlo_monotonicity, MonotonicityReport};
pub use tails::{is_floor, moment, moment_series, outside_probability, tail_series, MomentSeries, TailSeries, FLOOR};
