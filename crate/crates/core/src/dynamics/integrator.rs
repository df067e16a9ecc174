use serde::{Deserialize, Serialize};

use super::preflight::PreflightPolicy;
use crate::{Error, Result, C64};

/// How step sizes are chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepMode {
    /// Step doubling with local error per unit time below `tolerance`.
    Adaptive,
    /// Equal steps no longer than `step` within each smooth segment.
    Fixed { step: f64 },
    /// One step between consecutive grid times (merged with outputs and breakpoints).
    Grid { times: Vec<f64> },
}

/// Integrator configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSettings {
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_mode")]
    pub mode: StepMode,
    /// Keep the state after every step (needed for frozen-coefficient replay).
    #[serde(default)]
    pub record_steps: bool,
    #[serde(default = "default_min_step")]
    pub min_step: f64,
    #[serde(default)]
    pub preflight: PreflightPolicy,
}

fn default_tolerance() -> f64 {
    1e-10
}
fn default_mode() -> StepMode {
    StepMode::Adaptive
}
fn default_min_step() -> f64 {
    1e-9
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            tolerance: default_tolerance(),
            mode: default_mode(),
            record_steps: false,
            min_step: default_min_step(),
            preflight: PreflightPolicy::default(),
        }
    }
}

impl IntegratorSettings {
    pub fn fixed(step: f64) -> Self {
        Self {
            mode: StepMode::Fixed { step },
            ..Self::default()
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn recording(mut self) -> Self {
        self.record_steps = true;
        self
    }

    pub fn with_preflight(mut self, preflight: PreflightPolicy) -> Self {
        self.preflight = preflight;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::param("tolerance", "must be positive"));
        }
        if !(self.min_step > 0.0) {
            return Err(Error::param("min_step", "must be positive"));
        }
        match &self.mode {
            StepMode::Fixed { step } if !(*step > 0.0) => Err(Error::param("step", "must be positive")),
            StepMode::Grid { times } if times.windows(2).any(|w| !(w[1] > w[0])) => {
                Err(Error::param("times", "grid times must increase strictly"))
            }
            _ => Ok(()),
        }
    }
}

/// Per-run integrator diagnostics.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IntegratorLog {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub rhs_evaluations: usize,
    pub min_step: f64,
    pub max_step: f64,
    /// Largest accepted local error estimate (adaptive mode only).
    pub max_error_estimate: f64,
    /// `|‖u_t‖ - ‖u₀‖|` at each snapshot.
    pub norm_drift: Vec<f64>,
    /// Running maximum of `norm_drift`.
    pub max_norm_drift: f64,
}

/// A stepped state: time and amplitudes.
pub type StepState = (f64, Vec<C64>);

struct Work {
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
}

impl Work {
    fn new(n: usize) -> Self {
        let z = vec![C64::new(0.0, 0.0); n];
        Self {
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z,
        }
    }
}

/// Right-hand side `(t, segment_mid, y, dy)`.
pub(crate) trait Rhs: FnMut(f64, f64, &[C64], &mut [C64]) {}
impl<F: FnMut(f64, f64, &[C64], &mut [C64])> Rhs for F {}

fn rk4_step<R: Rhs>(rhs: &mut R, t: f64, h: f64, mid: f64, y: &[C64], out: &mut [C64], w: &mut Work) {
    rhs(t, mid, y, &mut w.k1);
    for i in 0..y.len() {
        w.tmp[i] = y[i] + w.k1[i] * (0.5 * h);
    }
    rhs(t + 0.5 * h, mid, &w.tmp, &mut w.k2);
    for i in 0..y.len() {
        w.tmp[i] = y[i] + w.k2[i] * (0.5 * h);
    }
    rhs(t + 0.5 * h, mid, &w.tmp, &mut w.k3);
    for i in 0..y.len() {
        w.tmp[i] = y[i] + w.k3[i] * h;
    }
    rhs(t + h, mid, &w.tmp, &mut w.k4);
    let c = h / 6.0;
    for i in 0..y.len() {
        out[i] = y[i] + (w.k1[i] + (w.k2[i] + w.k3[i]) * 2.0 + w.k4[i]) * c;
    }
}

fn l2(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Sorted, deduplicated segment boundaries in `[t0, t_end]`.
fn boundaries(t0: f64, outputs: &[f64], breakpoints: &[f64], grid: &[f64]) -> Vec<f64> {
    let t_end = *outputs.last().expect("outputs checked nonempty");
    let mut b: Vec<f64> = std::iter::once(t0)
        .chain(outputs.iter().copied())
        .chain(breakpoints.iter().copied())
        .chain(grid.iter().copied())
        .filter(|&t| t >= t0 && t <= t_end)
        .collect();
    b.sort_by(f64::total_cmp);
    b.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    b
}

/// Step-doubling differences below this fraction of the norm are roundoff and always accepted.
const ROUNDOFF_FLOOR: f64 = 1e3 * f64::EPSILON;

/// Integrates `y' = rhs(t, y)` from `t0` and returns the states at `outputs`.
///
/// `on_step` sees every accepted state, including the initial one.
#[allow(clippy::too_many_arguments)]
pub(crate) fn integrate<R: Rhs, S: FnMut(f64, &[C64])>(
    y0: &[C64],
    t0: f64,
    outputs: &[f64],
    breakpoints: &[f64],
    settings: &IntegratorSettings,
    initial_step: f64,
    mut rhs: R,
    mut on_step: S,
) -> Result<(Vec<StepState>, IntegratorLog)> {
    settings.validate()?;
    if outputs.is_empty() {
        return Err(Error::param("output_times", "need at least one output time"));
    }
    if outputs.windows(2).any(|w| !(w[1] > w[0])) || outputs[0] < t0 {
        return Err(Error::param("output_times", "must increase strictly and start at or after t0"));
    }
    let n = y0.len();
    let grid: &[f64] = match &settings.mode {
        StepMode::Grid { times } => times,
        _ => &[],
    };
    let bounds = boundaries(t0, outputs, breakpoints, grid);
    let is_output = |t: f64| outputs.iter().any(|&o| (o - t).abs() <= 1e-12 * o.abs().max(1.0));
    let norm0 = l2(y0);

    let mut log = IntegratorLog {
        min_step: f64::INFINITY,
        ..IntegratorLog::default()
    };
    let mut snaps = Vec::with_capacity(outputs.len());
    let record = |t: f64, y: &[C64], log: &mut IntegratorLog, snaps: &mut Vec<StepState>| {
        let drift = (l2(y) - norm0).abs();
        log.max_norm_drift = log.max_norm_drift.max(drift);
        log.norm_drift.push(drift);
        snaps.push((t, y.to_vec()));
    };

    let mut y = y0.to_vec();
    let mut t = t0;
    on_step(t, &y);
    if is_output(t) {
        record(t, &y, &mut log, &mut snaps);
    }
    let mut w = Work::new(n);
    let mut y1 = vec![C64::new(0.0, 0.0); n];
    let mut y2 = vec![C64::new(0.0, 0.0); n];
    let mut yh = vec![C64::new(0.0, 0.0); n];
    let mut h = initial_step;
    let tol = settings.tolerance;

    for seg in bounds.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let mid = 0.5 * (a + b);
        match &settings.mode {
            StepMode::Adaptive => {
                while t < b {
                    let remaining = b - t;
                    let last = h >= remaining * (1.0 - 1e-10);
                    // split the tail evenly rather than leave a sliver
                    let step = if last {
                        remaining
                    } else if 2.0 * h > remaining {
                        0.5 * remaining
                    } else {
                        h
                    };
                    rk4_step(&mut rhs, t, step, mid, &y, &mut y1, &mut w);
                    rk4_step(&mut rhs, t, 0.5 * step, mid, &y, &mut yh, &mut w);
                    rk4_step(&mut rhs, t + 0.5 * step, 0.5 * step, mid, &yh, &mut y2, &mut w);
                    log.rhs_evaluations += 12;
                    let diff: f64 = y1.iter().zip(&y2).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt();
                    let err = diff / 15.0;
                    let factor = if err == 0.0 {
                        4.0
                    } else {
                        (0.9 * (tol * step / err).powf(0.25)).clamp(0.2, 4.0)
                    };
                    if err <= tol * step || diff <= ROUNDOFF_FLOOR * norm0 {
                        std::mem::swap(&mut y, &mut y2);
                        t = if last { b } else { t + step };
                        log.accepted_steps += 1;
                        log.min_step = log.min_step.min(step);
                        log.max_step = log.max_step.max(step);
                        log.max_error_estimate = log.max_error_estimate.max(err);
                        on_step(t, &y);
                        if !last {
                            h = step * factor;
                        } else if factor < 1.0 {
                            h *= factor;
                        }
                    } else {
                        log.rejected_steps += 1;
                        h = step * factor;
                        if h < settings.min_step {
                            return Err(Error::StepUnderflow { t, step: h });
                        }
                    }
                }
            }
            StepMode::Fixed { step } => {
                let m = (((b - a) / step) - 1e-9).ceil().max(1.0) as usize;
                let hs = (b - a) / m as f64;
                for k in 0..m {
                    rk4_step(&mut rhs, t, hs, mid, &y, &mut y1, &mut w);
                    std::mem::swap(&mut y, &mut y1);
                    t = if k + 1 == m { b } else { a + (k + 1) as f64 * hs };
                    log.rhs_evaluations += 4;
                    log.accepted_steps += 1;
                    log.min_step = log.min_step.min(hs);
                    log.max_step = log.max_step.max(hs);
                    on_step(t, &y);
                }
            }
            StepMode::Grid { .. } => {
                let hs = b - a;
                rk4_step(&mut rhs, t, hs, mid, &y, &mut y1, &mut w);
                std::mem::swap(&mut y, &mut y1);
                t = b;
                log.rhs_evaluations += 4;
                log.accepted_steps += 1;
                log.min_step = log.min_step.min(hs);
                log.max_step = log.max_step.max(hs);
                on_step(t, &y);
            }
        }
        if is_output(b) {
            record(b, &y, &mut log, &mut snaps);
        }
    }
    if !log.min_step.is_finite() {
        log.min_step = 0.0;
    }
    Ok((snaps, log))
}
