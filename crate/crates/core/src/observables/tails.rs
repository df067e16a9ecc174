use serde::{Deserialize, Serialize};

use crate::dynamics::{Trajectory, WaveState};
use crate::operators::DistanceField;

/// Tail values below this are reported as floor.
pub const FLOOR: f64 = 1e-14;

pub fn is_floor(v: f64) -> bool {
    v < FLOOR
}

fn distances(state: &WaveState, set: Option<&DistanceField>) -> Vec<f64> {
    match set {
        Some(f) => f.values().to_vec(),
        None => state.geometry.radii(),
    }
}

/// `P(N) = Σ_{dist(x) > N} |u(x)|²`, with `dist = |x|` or the distance to a set.
pub fn outside_probability(state: &WaveState, n: f64, set: Option<&DistanceField>) -> f64 {
    moment(state, 0.0, n, set)
}

/// `P_r(N) = Σ_{dist(x) > N} dist(x)^r |u(x)|²`.
pub fn moment(state: &WaveState, r: f64, n: f64, set: Option<&DistanceField>) -> f64 {
    let d = distances(state, set);
    state
        .amplitudes
        .iter()
        .zip(&d)
        .filter(|(_, &x)| x > n)
        .map(|(a, &x)| if r == 0.0 { a.norm_sqr() } else { x.powf(r) * a.norm_sqr() })
        .sum()
}

/// `P(N(t), t)` along a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailSeries {
    pub times: Vec<f64>,
    pub thresholds: Vec<f64>,
    pub values: Vec<f64>,
    pub floor: Vec<bool>,
}

impl TailSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest value with `t` in `[t0, t1]`.
    pub fn max_in(&self, t0: f64, t1: f64) -> f64 {
        self.times
            .iter()
            .zip(&self.values)
            .filter(|(&t, _)| t >= t0 - 1e-12 && t <= t1 + 1e-12)
            .map(|(_, &v)| v)
            .fold(0.0, f64::max)
    }
}

/// `P_r(N(t), t)` along a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSeries {
    pub times: Vec<f64>,
    pub order: f64,
    pub thresholds: Vec<f64>,
    pub values: Vec<f64>,
}

/// Tail series for the threshold schedule `N(t)`.
pub fn tail_series<F: Fn(f64) -> f64>(trajectory: &Trajectory, threshold: F, set: Option<&DistanceField>) -> TailSeries {
    let mut s = TailSeries {
        times: Vec::new(),
        thresholds: Vec::new(),
        values: Vec::new(),
        floor: Vec::new(),
    };
    for snap in &trajectory.snapshots {
        let n = threshold(snap.t);
        let v = outside_probability(snap, n, set);
        s.times.push(snap.t);
        s.thresholds.push(n);
        s.values.push(v);
        s.floor.push(is_floor(v));
    }
    s
}

/// Moment series for the threshold schedule `N(t)`.
pub fn moment_series<F: Fn(f64) -> f64>(
    trajectory: &Trajectory,
    r: f64,
    threshold: F,
    set: Option<&DistanceField>,
) -> MomentSeries {
    let mut s = MomentSeries {
        times: Vec::new(),
        order: r,
        thresholds: Vec::new(),
        values: Vec::new(),
    };
    for snap in &trajectory.snapshots {
        let n = threshold(snap.t);
        s.times.push(snap.t);
        s.thresholds.push(n);
        s.values.push(moment(snap, r, n, set));
    }
    s
}
