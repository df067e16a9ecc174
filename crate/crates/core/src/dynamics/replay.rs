use serde::{Deserialize, Serialize};

use super::evolve::{evolve, Trajectory};
use super::integrator::{IntegratorSettings, StepMode};
use super::{NonlinearSpec, PotentialSchedule, WaveState};
use crate::operators::LatticeKernel;
use crate::{Error, Result, C64};

/// Largest knot spacing accepted for the frozen potential table.
pub const REPLAY_MAX_GAP: f64 = 0.1;

/// Distance between a nonlinear run and its frozen-coefficient linear replay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    /// `‖q_t - u_t‖₂` at each snapshot time.
    pub deviations: Vec<f64>,
    pub max_deviation: f64,
    pub knots: usize,
    pub max_gap: f64,
}

/// Re-solves the linear equation `i∂ₜu = (H₀ + V̄(t) + |N(t, q_t)|)u` with the
/// nonlinear term frozen along the recorded solution `q_t`.
///
/// `|N(t, q_t)|` is tabulated at every recorded step with its exact time
/// derivative and interpolated by cubic Hermite pieces; the replay steps on
/// the same grid as the original run.
pub fn frozen_coefficient_replay(
    nls: &Trajectory,
    kernel: &LatticeKernel,
    potential: &PotentialSchedule,
    nonlinearity: &NonlinearSpec,
) -> Result<ReplayReport> {
    let steps = nls
        .steps
        .as_ref()
        .ok_or_else(|| Error::Interpolation("trajectory was run without step recording".into()))?;
    if steps.len() < 2 {
        return Err(Error::Interpolation("need at least two recorded steps".into()));
    }
    let max_gap = steps.windows(2).map(|w| w[1].0 - w[0].0).fold(0.0, f64::max);
    if max_gap > REPLAY_MAX_GAP {
        return Err(Error::Interpolation(format!(
            "largest step gap {max_gap:.3e} exceeds {REPLAY_MAX_GAP}"
        )));
    }
    let geometry = *kernel.geometry();
    let n = geometry.site_count();
    let matrix = kernel.matrix();
    let mut times = Vec::with_capacity(steps.len());
    let mut values = Vec::with_capacity(steps.len());
    let mut slopes = Vec::with_capacity(steps.len());
    let mut vbar = vec![0.0; n];
    let mut hq = vec![C64::new(0.0, 0.0); n];
    for (k, (t, q)) in steps.iter().enumerate() {
        // the piece to the right of a knot, except at the last knot
        let mid = if k + 1 < steps.len() {
            0.5 * (t + steps[k + 1].0)
        } else {
            0.5 * (t + steps[k - 1].0)
        };
        potential.fill(*t, mid, &geometry, &mut vbar);
        matrix.apply(q, &mut hq);
        let nq: Vec<f64> = q.iter().map(|&a| nonlinearity.modulus(a)).collect();
        let rate: Vec<f64> = (0..n)
            .map(|i| {
                let z = hq[i] + q[i] * (vbar[i] + nq[i]);
                nonlinearity.modulus_rate(q[i], C64::new(z.im, -z.re))
            })
            .collect();
        times.push(*t);
        values.push(nq);
        slopes.push(rate);
    }
    let frozen = PotentialSchedule::Superposed {
        parts: vec![potential.clone(), PotentialSchedule::Tabulated { times: times.clone(), values, slopes }],
    };
    let settings = IntegratorSettings {
        mode: StepMode::Grid { times: times.clone() },
        record_steps: false,
        ..nls.meta.settings.clone()
    };
    let u0 = WaveState {
        geometry,
        amplitudes: steps[0].1.clone(),
        t: 0.0,
    };
    let outputs = nls.times();
    let lin = evolve(kernel, &frozen, &u0, &outputs, &settings)?;
    let deviations: Vec<f64> = nls
        .snapshots
        .iter()
        .zip(&lin.snapshots)
        .map(|(a, b)| a.distance(b))
        .collect();
    Ok(ReplayReport {
        max_deviation: deviations.iter().copied().fold(0.0, f64::max),
        deviations,
        knots: times.len(),
        max_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::evolve_nls;
    use crate::operators::{build_laplacian, BoxGeometry};

    fn run(g: f64, h: f64) -> (Trajectory, LatticeKernel) {
        let geom = BoxGeometry::cube(1, 40).unwrap();
        let k = build_laplacian(geom);
        let tr = evolve_nls(
            &k,
            &PotentialSchedule::Zero,
            &NonlinearSpec::cubic(g),
            &WaveState::delta(geom),
            &[1.0, 2.5, 5.0],
            &IntegratorSettings::fixed(h).recording(),
        )
        .unwrap();
        (tr, k)
    }

    #[test]
    fn replay_without_nonlinearity() {
        let (tr, k) = run(0.0, 0.01);
        let r = frozen_coefficient_replay(&tr, &k, &PotentialSchedule::Zero, &NonlinearSpec::cubic(0.0)).unwrap();
        assert!(r.max_deviation <= 1e-12, "{}", r.max_deviation);
    }

    #[test]
    fn cubic_replay_on_shared_grid() {
        let (tr, k) = run(1.0, 0.005);
        let r = frozen_coefficient_replay(&tr, &k, &PotentialSchedule::Zero, &NonlinearSpec::cubic(1.0)).unwrap();
        assert!(r.max_deviation <= 1e-8, "{}", r.max_deviation);
    }

    #[test]
    fn replay_converges_under_refinement() {
        let dev = |h| {
            let (tr, k) = run(1.0, h);
            frozen_coefficient_replay(&tr, &k, &PotentialSchedule::Zero, &NonlinearSpec::cubic(1.0))
                .unwrap()
                .max_deviation
        };
        let (a, b) = (dev(0.04), dev(0.02));
        assert!(b <= 0.5 * a, "{a} {b}");
    }

    #[test]
    fn unrecorded_trajectory_rejected() {
        let geom = BoxGeometry::cube(1, 20).unwrap();
        let k = build_laplacian(geom);
        let tr = evolve_nls(
            &k,
            &PotentialSchedule::Zero,
            &NonlinearSpec::cubic(1.0),
            &WaveState::delta(geom),
            &[1.0],
            &IntegratorSettings::fixed(0.01),
        )
        .unwrap();
        let r = frozen_coefficient_replay(&tr, &k, &PotentialSchedule::Zero, &NonlinearSpec::cubic(1.0));
        assert!(matches!(r, Err(Error::Interpolation(_))));
    }
}
