use serde::{Deserialize, Serialize};

use crate::cutoffs::{astlo_field, AstloParams, BumpFunction, Schedule};
use crate::dynamics::Trajectory;
use crate::operators::{b_operator, DistanceField, LatticeKernel};
use crate::{Error, Result, C64};

/// First-moment growth versus `κt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadinSimonReport {
    pub times: Vec<f64>,
    /// `‖|x|u_t‖`.
    pub first_moment: Vec<f64>,
    /// `max_t (‖|x|u_t‖ - ‖|x|u₀‖ - Ct)` with `C` the supplied constant.
    pub max_violation: f64,
    pub constant: f64,
    /// Smallest `C` for which the bound holds on the snapshots.
    pub smallest_constant: f64,
}

fn first_moment(state: &crate::dynamics::WaveState) -> f64 {
    let r = state.geometry.radii();
    state
        .amplitudes
        .iter()
        .zip(&r)
        .map(|(a, x)| x * x * a.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Checks `‖|x|u_t‖ ≤ ‖|x|u₀‖ + Ct` on every snapshot; the first snapshot is taken as `u₀`.
pub fn radin_simon_check(trajectory: &Trajectory, constant: f64) -> Result<RadinSimonReport> {
    let first = trajectory
        .snapshots
        .first()
        .ok_or_else(|| Error::param("trajectory", "no snapshots"))?;
    let t0 = first.t;
    let m0 = first_moment(first);
    let moments: Vec<f64> = trajectory.snapshots.iter().map(first_moment).collect();
    let mut max_violation = f64::NEG_INFINITY;
    let mut smallest: f64 = 0.0;
    for (s, &m) in trajectory.snapshots.iter().zip(&moments) {
        let dt = s.t - t0;
        max_violation = max_violation.max(m - m0 - constant * dt);
        if dt > 0.0 {
            smallest = smallest.max((m - m0) / dt);
        }
    }
    Ok(RadinSimonReport {
        times: trajectory.times(),
        first_moment: moments,
        max_violation,
        constant,
        smallest_constant: smallest,
    })
}

/// Momentum flux through the moving window versus the required rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontDiagnostic {
    pub times: Vec<f64>,
    /// `‖i[H, φ] W_t(φ) u_t‖`.
    pub lhs: Vec<f64>,
    /// `(vα - δ) t^{α-1} ‖W_t(φ) u_t‖`.
    pub rhs: Vec<f64>,
    pub holds: Vec<bool>,
}

/// Evaluates the front condition with `W_t(φ) = w((2α/(δt^α))(φ - v̄t^α))`, `v̄ = v - δ/(2α)`.
///
/// The potential is diagonal, so `[H, φ] = [H₀, φ]`. Snapshots at `t = 0` are skipped.
#[allow(clippy::too_many_arguments)]
pub fn front_condition(
    trajectory: &Trajectory,
    kernel: &LatticeKernel,
    phi: &DistanceField,
    v: f64,
    delta: f64,
    alpha: f64,
    w: &BumpFunction,
) -> Result<FrontDiagnostic> {
    if !(delta > 0.0) || !(v > delta / alpha) {
        return Err(Error::param("v", format!("need δ > 0 and v > δ/α (v={v}, δ={delta}, α={alpha})")));
    }
    let params = AstloParams {
        v_bar: v - delta / (2.0 * alpha),
        v,
        alpha,
        radius: 0.0,
        epsilon: w.epsilon(),
        schedule: Schedule::Linear { t_ref: 1.0 },
    };
    params.validate()?;
    let b1 = b_operator(kernel, phi, 1)?;
    let mut out = FrontDiagnostic {
        times: Vec::new(),
        lhs: Vec::new(),
        rhs: Vec::new(),
        holds: Vec::new(),
    };
    let n = phi.values().len();
    let mut wu = vec![C64::new(0.0, 0.0); n];
    let mut bwu = vec![C64::new(0.0, 0.0); n];
    for s in trajectory.snapshots.iter().filter(|s| s.t > 0.0) {
        let field = astlo_field(|x| w.value(x), phi.values(), &params, s.t)?;
        for ((o, a), f) in wu.iter_mut().zip(&s.amplitudes).zip(&field) {
            *o = a * f;
        }
        b1.apply(&wu, &mut bwu);
        let lhs = bwu.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let wn = wu.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let rhs = (v * alpha - delta) * s.t.powf(alpha - 1.0) * wn;
        out.times.push(s.t);
        out.lhs.push(lhs);
        out.rhs.push(rhs);
        out.holds.push(lhs <= rhs * (1.0 + 1e-12) + 1e-300);
    }
    Ok(out)
}
