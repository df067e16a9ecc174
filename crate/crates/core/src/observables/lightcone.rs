use serde::{Deserialize, Serialize};

use super::fit::{fit_decay, ExponentFit};
use super::tails::{outside_probability, tail_series, TailSeries, FLOOR};
use crate::dynamics::Trajectory;
use crate::operators::DistanceField;
use crate::{Error, Result};

/// Tail beyond the moving front `vt^α + R` with its decay fit and minimal constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LightconeReport {
    pub v: f64,
    pub alpha: f64,
    pub radius: f64,
    pub order: usize,
    pub tail: TailSeries,
    /// `None` when every value in the window sits at the floor.
    pub fit: Option<ExponentFit>,
    pub below_floor: bool,
    /// `P(R, 0)`.
    pub initial_tail: f64,
    /// `γ = 2α - 1`.
    pub gamma: f64,
    /// `β = min((n+1)γ, (n+1)α - 1)`.
    pub beta: f64,
    /// Smallest `C` with `P ≤ (1 + Ct^{-γ})P(R,0) + Ct^{-β}` on the window.
    pub smallest_c: f64,
}

/// `P(vt^α + R, t)` along the trajectory, fitted on `window`.
pub fn lightcone_report(
    trajectory: &Trajectory,
    v: f64,
    alpha: f64,
    radius: f64,
    order: usize,
    window: (f64, f64),
    set: Option<&DistanceField>,
) -> Result<LightconeReport> {
    if !(v > 0.0) || !(alpha > 0.0) {
        return Err(Error::param("v", "speed and exponent must be positive"));
    }
    let u0 = trajectory
        .snapshots
        .first()
        .ok_or_else(|| Error::param("trajectory", "no snapshots"))?;
    let initial_tail = outside_probability(u0, radius, set);
    let tail = tail_series(trajectory, |t| v * t.powf(alpha) + radius, set);
    let gamma = 2.0 * alpha - 1.0;
    let n1 = (order + 1) as f64;
    let beta = (n1 * gamma).min(n1 * alpha - 1.0);
    let in_window = |t: f64| t > 0.0 && t >= window.0 - 1e-12 && t <= window.1 + 1e-12;
    let mut smallest_c: f64 = 0.0;
    let mut any = false;
    let mut all_floor = true;
    for (&t, &p) in tail.times.iter().zip(&tail.values) {
        if !in_window(t) {
            continue;
        }
        any = true;
        all_floor &= p < FLOOR;
        if p < FLOOR {
            continue;
        }
        let excess = p - initial_tail;
        let denom = t.powf(-gamma) * initial_tail + t.powf(-beta);
        if excess > 0.0 {
            smallest_c = smallest_c.max(excess / denom);
        }
    }
    if !any {
        return Err(Error::DegenerateFit(format!(
            "no snapshot in window [{}, {}]",
            window.0, window.1
        )));
    }
    let fit = if all_floor {
        None
    } else {
        Some(fit_decay(&tail.times, &tail.values, window, FLOOR)?)
    };
    Ok(LightconeReport {
        v,
        alpha,
        radius,
        order,
        tail,
        fit,
        below_floor: all_floor,
        initial_tail,
        gamma,
        beta,
        smallest_c,
    })
}

/// Finite-time decay parameter at one `α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportEntry {
    pub alpha: f64,
    /// `-slope` of `log P(t^α - 1, t)` against `log t`; `None` stands for `+∞`
    /// (every value at the floor, or the fitted value above the cap).
    pub s_plus: Option<f64>,
    pub fit: Option<ExponentFit>,
}

/// Decay parameters over an `α` grid and the resulting upper transport exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportReport {
    pub window: (f64, f64),
    /// Fitted decay parameters above this count as infinite.
    pub finite_cap: f64,
    pub entries: Vec<TransportEntry>,
    /// Largest grid `α` with finite `S⁺(α)`; `None` when there is none (no transport).
    pub alpha_u_plus: Option<f64>,
    pub caveat: String,
}

/// Default cap separating finite from infinite fitted decay parameters.
pub const TRANSPORT_FINITE_CAP: f64 = 20.0;

/// `S⁺(α)` for each `α` in the grid, fitted over `window`.
pub fn transport_exponents(
    trajectory: &Trajectory,
    alphas: &[f64],
    window: (f64, f64),
    finite_cap: f64,
) -> Result<TransportReport> {
    if alphas.is_empty() {
        return Err(Error::DegenerateFit("empty α grid".into()));
    }
    let count = trajectory
        .times()
        .iter()
        .filter(|&&t| t > 0.0 && t >= window.0 - 1e-12 && t <= window.1 + 1e-12)
        .count();
    if count < 2 {
        return Err(Error::DegenerateFit(format!(
            "window [{}, {}] holds {count} snapshots",
            window.0, window.1
        )));
    }
    let mut entries = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let tail = tail_series(trajectory, |t| t.powf(alpha) - 1.0, None);
        let fit = fit_decay(&tail.times, &tail.values, window, FLOOR).ok();
        let s_plus = fit.as_ref().map(|f| f.exponent).filter(|&s| s <= finite_cap);
        entries.push(TransportEntry { alpha, s_plus, fit });
    }
    let alpha_u_plus = entries
        .iter()
        .filter(|e| e.s_plus.is_some())
        .map(|e| e.alpha)
        .fold(None, |m: Option<f64>, a| Some(m.map_or(a, |m| m.max(a))));
    Ok(TransportReport {
        window,
        finite_cap,
        entries,
        alpha_u_plus,
        caveat: format!(
            "finite-time estimate over t in [{}, {}]; S+ is a limsup as t -> infinity",
            window.0, window.1
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{evolve, IntegratorSettings, PotentialSchedule, PreflightPolicy, WaveState};
    use crate::operators::{build_laplacian, build_powerlaw_kernel, BoxGeometry};

    fn free(l: usize, times: &[f64]) -> Trajectory {
        let g = BoxGeometry::cube(1, l).unwrap();
        evolve(
            &build_laplacian(g),
            &PotentialSchedule::Zero,
            &WaveState::delta(g),
            times,
            &IntegratorSettings::default(),
        )
        .unwrap()
    }

    #[test]
    fn free_laplacian_tail_values() {
        let times: Vec<f64> = (0..=15).map(|i| i as f64).collect();
        let tr = free(90, &times);
        let r = lightcone_report(&tr, 3.0, 1.0, 0.0, 4, (3.0, 12.0), None).unwrap();
        assert_eq!(r.initial_tail, 0.0);
        // dense-oracle values at the start of the window
        assert!((r.tail.values[5] / 5.47e-6 - 1.0).abs() < 0.01, "{}", r.tail.values[5]);
        assert!((r.tail.values[6] / 1.29e-6 - 1.0).abs() < 0.01, "{}", r.tail.values[6]);
        assert!(r.tail.max_in(7.0, 15.0) <= 1e-6);
        assert!(r.fit.unwrap().exponent > 4.0);
        // δ₀ start: C is max P t^β with β = n for α = 1
        let c = (1..=12)
            .filter(|&t| t >= 3)
            .map(|t| r.tail.values[t] * (t as f64).powi(4))
            .fold(0.0, f64::max);
        assert!((r.smallest_c - c).abs() <= 1e-12 * c);
    }

    #[test]
    fn floor_window_passes() {
        let g = BoxGeometry::cube(1, 20).unwrap();
        let k = build_powerlaw_kernel(g, 2.0, 0.0).unwrap();
        let s = IntegratorSettings::default().with_preflight(PreflightPolicy::Skip);
        let tr = evolve(&k, &PotentialSchedule::Zero, &WaveState::delta(g), &[1.0, 2.0, 3.0], &s).unwrap();
        let r = lightcone_report(&tr, 1.0, 1.0, 0.0, 2, (1.0, 3.0), None).unwrap();
        assert!(r.below_floor);
        assert!(r.fit.is_none());
    }

    #[test]
    fn no_transport_without_hopping() {
        let g = BoxGeometry::cube(1, 20).unwrap();
        let k = build_powerlaw_kernel(g, 2.0, 0.0).unwrap();
        let s = IntegratorSettings::default().with_preflight(PreflightPolicy::Skip);
        let times: Vec<f64> = (1..=8).map(|i| i as f64).collect();
        let tr = evolve(&k, &PotentialSchedule::Zero, &WaveState::delta(g), &times, &s).unwrap();
        let r = transport_exponents(&tr, &[0.5, 0.75, 1.0], (2.0, 8.0), TRANSPORT_FINITE_CAP).unwrap();
        assert!(r.entries.iter().all(|e| e.s_plus.is_none()));
        assert_eq!(r.alpha_u_plus, None);
    }

    #[test]
    fn free_transport_is_ballistic() {
        let times: Vec<f64> = (4..=16).map(|i| i as f64).collect();
        let tr = free(70, &times);
        let alphas: Vec<f64> = (0..=9).map(|i| 0.55 + 0.05 * i as f64).collect();
        let r = transport_exponents(&tr, &alphas, (4.0, 16.0), TRANSPORT_FINITE_CAP).unwrap();
        let a = r.alpha_u_plus.unwrap();
        assert!((0.9..=1.0).contains(&a), "{a}");
    }

    #[test]
    fn degenerate_window() {
        let tr = free(40, &[1.0, 2.0]);
        assert!(transport_exponents(&tr, &[1.0], (5.0, 9.0), 20.0).is_err());
        assert!(transport_exponents(&tr, &[], (1.0, 2.0), 20.0).is_err());
    }
}
