use serde::{Deserialize, Serialize};

use super::fit::{fit_decay, ExponentFit};
use super::tails::FLOOR;
use crate::cutoffs::{astlo_field_with_s, AstloParams, SmoothedStep};
use crate::dynamics::{Trajectory, WaveState};
use crate::operators::DistanceField;
use crate::{Error, Result};

/// Residual `m(t) = ⟨A_{s(t)}(t,χ)⟩_t - ⟨A_{s(t)}(0,χ)⟩₀` of the ASTLO monotonicity estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub times: Vec<f64>,
    pub s: Vec<f64>,
    pub late: Vec<f64>,
    pub early: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Power-law fit of the positive residuals, when at least two lie above the floor.
    pub tail_fit: Option<ExponentFit>,
}

impl MonotonicityReport {
    /// Largest residual at times `t ≥ t_min`.
    pub fn max_after(&self, t_min: f64) -> f64 {
        self.times
            .iter()
            .zip(&self.residuals)
            .filter(|(&t, _)| t >= t_min - 1e-12)
            .map(|(_, &m)| m)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn expectation(state: &WaveState, field: &[f64]) -> f64 {
    state.amplitudes.iter().zip(field).map(|(a, f)| f * a.norm_sqr()).sum()
}

/// Pairs each snapshot with the initial state under the same adiabatic parameter `s(t)`.
///
/// Both expectations use the normalized `χ/sup χ`. The first snapshot must be at `t = 0`.
pub fn astlo_monotonicity(
    trajectory: &Trajectory,
    phi: &DistanceField,
    chi: &SmoothedStep,
    params: &AstloParams,
) -> Result<MonotonicityReport> {
    params.validate()?;
    let u0 = trajectory
        .snapshots
        .first()
        .filter(|s| s.t == 0.0)
        .ok_or_else(|| Error::param("trajectory", "first snapshot must be at t = 0"))?;
    let f = |x: f64| chi.normalized(x);
    let mut r = MonotonicityReport {
        times: Vec::new(),
        s: Vec::new(),
        late: Vec::new(),
        early: Vec::new(),
        residuals: Vec::new(),
        tail_fit: None,
    };
    for snap in trajectory.snapshots.iter().filter(|s| s.t > 0.0) {
        let s = params.s_at(snap.t);
        let late = expectation(snap, &astlo_field_with_s(f, phi.values(), params, snap.t, s)?);
        let early = expectation(u0, &astlo_field_with_s(f, phi.values(), params, 0.0, s)?);
        r.times.push(snap.t);
        r.s.push(s);
        r.late.push(late);
        r.early.push(early);
        r.residuals.push(late - early);
    }
    if let (Some(&a), Some(&b)) = (r.times.first(), r.times.last()) {
        r.tail_fit = fit_decay(&r.times, &r.residuals, (a, b), FLOOR).ok();
    }
    Ok(r)
}
