//! Lattice Schrödinger dynamics laboratory.
//!
//! Time-evolves wavepackets on finite boxes of `Z^d` under `i∂ₜu = (H₀ + V(t))u`
//! and its nonlinear variant, and measures what the commutator method predicts
//! about them: light-cone tails, adiabatic localization observables, multiple
//! commutator norms, commutator-expansion remainders and resolvent decay.
//!
//! The crate is organized by subsystem:
//!
//! * [`operators`]: box geometry, hopping kernels, distance fields, multiple
//!   commutators and the structural constants κ, M, M_k.
//! * [`cutoffs`]: smooth bumps, smoothed steps and the ASTLO fields built from them.
//! * [`dynamics`]: linear and nonlinear time evolution, frozen-coefficient replay.
//! * [`observables`]: tails, moments, light-cone fits, transport exponents.
//! * [`spectral`]: resolvents, contour propagators, Combes–Thomas fits,
//!   expansion residuals.
//! * [`harness`]: scenario configs, reports and file outputs used by the CLI.
//!
//! With the default `parallel` feature, row-wise operator application and
//! independent runs are spread over a rayon pool; without it everything runs
//! on the calling thread with identical numerical output.

pub mod cutoffs;
pub mod dynamics;
mod error;
pub mod harness;
pub mod linalg;
pub mod observables;
pub mod operators;
pub mod par;
pub mod quadrature;
pub mod spectral;

pub use error::{Error, Result};

/// Complex amplitude type used throughout.
pub type C64 = num_complex::Complex64;
