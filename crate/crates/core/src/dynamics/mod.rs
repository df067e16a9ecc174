//! Time evolution of `i∂ₜu = (H₀ + V(t))u` and its nonlinear variant, the
//! box-size preflight, frozen-coefficient replay and trajectory export.

mod evolve;
mod integrator;
mod io;
mod nonlinear;
mod potential;
mod preflight;
mod replay;
mod state;

pub use evolve::{evolve, evolve_nls, heisenberg_expectation, Observable, Trajectory, TrajectoryMeta};
pub use integrator::{IntegratorLog, IntegratorSettings, StepMode, StepState};
pub use io::{export_trajectory, load_trajectory, write_atomic, TrajectoryManifest, AMPLITUDE_FILE, MANIFEST_FILE};
pub use nonlinear::NonlinearSpec;
pub use potential::{random_piece, PotentialSchedule};
pub use preflight::{preflight, PreflightPolicy, PreflightReport};
pub use replay::{frozen_coefficient_replay, ReplayReport, REPLAY_MAX_GAP};
pub use state::{InitialProfile, WaveState};

pub(crate) use io::hex;
