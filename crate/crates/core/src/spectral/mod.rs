//! Resolvents, contour propagators, resolvent decay fits and
//! commutator-expansion remainders for static Hamiltonians.

mod banded;
mod contour;
mod decay;
mod expansion;
mod resolvent;

pub use banded::{bandwidth, BandedLu};
pub use contour::{dunford_columns, dunford_propagator, ContourRule, ContourSpec, ContourValue, MIN_CONTOUR_NODES};
pub use decay::{
    combes_thomas_fit, propagator_shape_check, DecayFit, DecayModel, ShapeReport, DECAY_FLOOR, ENVELOPE_PREFACTOR,
    SHAPE_CONSTANT_CAP,
};
pub use expansion::{
    expansion_remainder, expansion_residual, leading_gap_operator, support_extremes, support_norm,
    symmetrized_leading_gap, window_shift, GapReport,
};
pub use resolvent::{
    resolvent_column, resolvent_element, StaticHamiltonian, MIN_SPECTRAL_DISTANCE, RESIDUAL_TOLERANCE,
    SPECTRAL_DENSE_CAP,
};
