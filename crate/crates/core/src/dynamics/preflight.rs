use serde::{Deserialize, Serialize};

use super::WaveState;
use crate::operators::{exponential_moment, structural_constants, KernelFamily, LatticeKernel};
use crate::{Error, Result};

/// Whether and how strictly the box size is checked before evolving.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PreflightPolicy {
    /// Require boundary mass below `tolerance`; long-range kernels use
    /// `long_range_tolerance`, or are not checked when it is absent.
    Enforce {
        tolerance: f64,
        long_range_tolerance: Option<f64>,
    },
    Skip,
}

impl Default for PreflightPolicy {
    fn default() -> Self {
        PreflightPolicy::Enforce {
            tolerance: 1e-12,
            long_range_tolerance: Some(1e-2),
        }
    }
}

/// Outcome of the box-size check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreflightReport {
    pub half_width: usize,
    pub required: usize,
    pub t_final: f64,
    /// Bound on the probability of reaching the boundary by `t_final`.
    pub boundary_bound: f64,
    pub method: String,
    pub passed: bool,
}

const MU_POINTS: usize = 240;

/// Bounds the mass that can reach the box boundary by time `t_final`.
///
/// Short-range kernels: with `ρ = |x|_∞`, `‖e^{μρ}u_t‖ ≤ e^{S_μ t}‖e^{μρ}u₀‖`
/// where `S_μ = max_x Σ_y |H₀(x,y)|(e^{μ|x-y|} - 1)`; the potential is diagonal
/// and drops out. Hence `P(|x|_∞ ≥ D) ≤ e^{-2μD + 2tS_μ}‖e^{μρ}u₀‖²`, minimized
/// over μ. The required half-width also covers `R_eff + 1.5κT`.
///
/// Power-law kernels: `P(|x| > L) ≤ (‖|x|u₀‖ + κT)²/(L+1)²` by the first-moment
/// bound and Markov's inequality.
pub fn preflight(
    kernel: &LatticeKernel,
    u0: &WaveState,
    t_final: f64,
    policy: PreflightPolicy,
) -> Result<PreflightReport> {
    let g = kernel.geometry();
    let l = g.half_width;
    let (tol, lr_tol) = match policy {
        PreflightPolicy::Skip => return Ok(skipped(l, t_final)),
        PreflightPolicy::Enforce {
            tolerance,
            long_range_tolerance,
        } => (tolerance, long_range_tolerance),
    };
    let kappa = structural_constants(kernel, 1)?.kappa;
    if kernel.is_long_range() {
        let Some(lr) = lr_tol else {
            return Ok(skipped(l, t_final));
        };
        let first = (0..u0.amplitudes.len())
            .map(|i| g.norm_of(i).powi(2) * u0.amplitudes[i].norm_sqr())
            .sum::<f64>()
            .sqrt();
        let reach = first + kappa * t_final;
        let bound = (reach / (l as f64 + 1.0)).powi(2).min(1.0);
        let required = ((reach / lr.sqrt()).ceil() as usize).saturating_sub(1);
        return finish(l, required, t_final, bound, "first-moment Markov bound", bound <= lr);
    }

    let mu_max = match kernel.spec().family {
        KernelFamily::Exponential { rate, .. } => 0.999 * rate,
        _ => 50.0,
    }
    .min(50.0);
    let radii: Vec<f64> = (0..u0.amplitudes.len())
        .map(|i| (0..g.dimension).map(|a| u0.geometry.coord(i, a).abs()).max().unwrap_or(0) as f64)
        .collect();
    let weights: Vec<f64> = u0.amplitudes.iter().map(|a| a.norm_sqr()).collect();
    let d_now = l as f64 + 1.0;
    let mut best_bound = f64::INFINITY;
    let mut best_distance = f64::INFINITY;
    for k in 0..MU_POINTS {
        let mu = 1e-3 * (mu_max / 1e-3).powf(k as f64 / (MU_POINTS - 1) as f64);
        let s_mu = exponential_moment(kernel, mu);
        let log_weight = log_sum_exp(radii.iter().zip(&weights).filter(|(_, &w)| w > 0.0).map(|(&r, &w)| 2.0 * mu * r + w.ln()));
        let log_tail = 2.0 * t_final * s_mu + log_weight;
        if !log_tail.is_finite() {
            continue;
        }
        best_bound = best_bound.min((log_tail - 2.0 * mu * d_now).exp());
        best_distance = best_distance.min(((log_tail - tol.ln()) / (2.0 * mu)).ceil());
    }
    let from_weight = if best_distance.is_finite() {
        (best_distance.max(1.0) as usize) - 1
    } else {
        usize::MAX
    };
    let r_eff = u0.effective_radius(tol);
    let from_speed = (r_eff + 1.5 * kappa * t_final).ceil() as usize;
    let required = from_weight.max(from_speed);
    finish(
        l,
        required,
        t_final,
        best_bound.min(1.0),
        "exponential-weight bound",
        l >= required,
    )
}

fn log_sum_exp<I: Iterator<Item = f64>>(it: I) -> f64 {
    let v: Vec<f64> = it.collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn skipped(l: usize, t_final: f64) -> PreflightReport {
    PreflightReport {
        half_width: l,
        required: 0,
        t_final,
        boundary_bound: f64::NAN,
        method: "skipped".into(),
        passed: true,
    }
}

fn finish(l: usize, required: usize, t_final: f64, bound: f64, method: &str, passed: bool) -> Result<PreflightReport> {
    let report = PreflightReport {
        half_width: l,
        required,
        t_final,
        boundary_bound: bound,
        method: method.into(),
        passed,
    };
    if !passed {
        return Err(Error::Preflight {
            half_width: l,
            required,
            t_final,
            detail: format!("{method} gives {bound:.3e}"),
        });
    }
    Ok(report)
}
