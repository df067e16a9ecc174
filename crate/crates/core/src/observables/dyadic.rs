use serde::{Deserialize, Serialize};

use super::tails::moment;
use crate::dynamics::{Trajectory, WaveState};
use crate::{Error, Result};

/// Shell decomposition of `P_r(2vt, t)` at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicPoint {
    pub t: f64,
    /// `P_r(2vt, t)`.
    pub moment: f64,
    /// `Q_k = Σ_{2^k vt < |x| ≤ 2^{k+1} vt} |x|^r |u(x)|²` for `k = 1, 2, ...`.
    pub shells: Vec<f64>,
    /// `|Σ_k Q_k - P_r(2vt, t)|`.
    pub partition_error: f64,
}

/// Uniform-in-time moment bound beyond `2vt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicReport {
    pub r: f64,
    pub r0: f64,
    pub v: f64,
    /// `B = P_{r₀}(0, 0)`, the initial moment of order `r₀`.
    pub initial_moment: f64,
    pub points: Vec<DyadicPoint>,
    /// `sup P_r(2vt, t)` over `t ∈ [1, fit_end]`.
    pub c_fit: f64,
    /// The same supremum over every snapshot with `t ≥ 1`.
    pub c_extended: f64,
    /// `c_extended ≤ 2 c_fit`.
    pub stable: bool,
    pub max_partition_error: f64,
}

fn shells(state: &WaveState, r: f64, inner: f64) -> Vec<f64> {
    let radii = state.geometry.radii();
    let rmax = radii.iter().copied().fold(0.0, f64::max);
    let mut q = Vec::new();
    let mut lo = inner;
    while lo < rmax {
        q.push(0.0);
        lo *= 2.0;
    }
    if inner <= 0.0 {
        return q;
    }
    for (a, &x) in state.amplitudes.iter().zip(&radii) {
        if x > inner {
            // the shell index k - 1 with 2^k vt < x ≤ 2^{k+1} vt
            let mut k = 0;
            let mut hi = 2.0 * inner;
            while x > hi {
                hi *= 2.0;
                k += 1;
            }
            q[k] += x.powf(r) * a.norm_sqr();
        }
    }
    q
}

/// Splits `P_r(2vt, t)` into dyadic shells and fits a uniform bound.
///
/// Snapshots with `t < 1` are skipped. The fitted constant uses `t ≤ fit_end`;
/// the extended constant uses every remaining snapshot.
pub fn dyadic_moment_bound(trajectory: &Trajectory, r: f64, r0: f64, v: f64, fit_end: f64) -> Result<DyadicReport> {
    if !(r >= 0.0) || !(r < r0) {
        return Err(Error::param("r", format!("need 0 <= r < r0, got r = {r}, r0 = {r0}")));
    }
    if !(v > 0.0) {
        return Err(Error::param("v", "must be positive"));
    }
    let u0 = trajectory
        .snapshots
        .first()
        .ok_or_else(|| Error::param("trajectory", "no snapshots"))?;
    let initial_moment = moment(u0, r0, 0.0, None);
    let mut points = Vec::new();
    for s in trajectory.snapshots.iter().filter(|s| s.t >= 1.0) {
        let inner = 2.0 * v * s.t;
        let m = moment(s, r, inner, None);
        let q = shells(s, r, inner);
        let total: f64 = q.iter().sum();
        points.push(DyadicPoint {
            t: s.t,
            moment: m,
            partition_error: (total - m).abs(),
            shells: q,
        });
    }
    if points.is_empty() {
        return Err(Error::DegenerateFit("no snapshot with t >= 1".into()));
    }
    let c_fit = points
        .iter()
        .filter(|p| p.t <= fit_end + 1e-12)
        .map(|p| p.moment)
        .fold(0.0, f64::max);
    let c_extended = points.iter().map(|p| p.moment).fold(0.0, f64::max);
    Ok(DyadicReport {
        r,
        r0,
        v,
        initial_moment,
        c_fit,
        c_extended,
        stable: c_extended <= 2.0 * c_fit,
        max_partition_error: points.iter().map(|p| p.partition_error).fold(0.0, f64::max),
        points,
    })
}
