use serde::{Deserialize, Serialize};

use super::integrator::{integrate, IntegratorLog, IntegratorSettings, StepState};
use super::preflight::{preflight, PreflightReport};
use super::{NonlinearSpec, PotentialSchedule, WaveState};
use crate::operators::{KernelSpec, LatticeKernel, SparseMatrix};
use crate::{Error, Result, C64};

/// Descriptive metadata carried with a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub kernel: KernelSpec,
    pub potential: String,
    pub nonlinearity: Option<NonlinearSpec>,
    pub settings: IntegratorSettings,
    pub preflight: PreflightReport,
    /// Largest `|q(x)|` seen when it exceeded the declared amplitude cap.
    pub hypothesis_violation: Option<f64>,
}

/// Snapshots at the requested output times plus integrator diagnostics.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<WaveState>,
    /// Every stepped state, when recording was requested.
    pub steps: Option<Vec<StepState>>,
    pub log: IntegratorLog,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn at(&self, t: f64) -> Option<&WaveState> {
        self.snapshots.iter().find(|s| (s.t - t).abs() <= 1e-12 * t.abs().max(1.0))
    }

    pub fn final_state(&self) -> &WaveState {
        self.snapshots.last().expect("trajectory has at least one snapshot")
    }
}

fn initial_step(kernel: &LatticeKernel, potential_bound: f64) -> f64 {
    let rate = kernel.matrix().max_row_sum() + potential_bound;
    (0.5 / rate.max(1e-3)).min(0.05)
}

fn check_state(kernel: &LatticeKernel, u0: &WaveState) -> Result<()> {
    if u0.geometry != *kernel.geometry() {
        return Err(Error::param("u0", "state and kernel live on different boxes"));
    }
    if (u0.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::param("u0", format!("state must be normalized, norm = {}", u0.norm())));
    }
    Ok(())
}

/// `-i (H₀ y + diag(v) y)`.
fn schrodinger_rhs(matrix: &SparseMatrix, v: &[f64], y: &[C64], dy: &mut [C64]) {
    matrix.apply(y, dy);
    for ((d, &yi), &vi) in dy.iter_mut().zip(y).zip(v) {
        let z = *d + yi * vi;
        *d = C64::new(z.im, -z.re);
    }
}

/// Caches `V` on piecewise-constant segments.
struct PotentialCache<'a> {
    schedule: &'a PotentialSchedule,
    geometry: crate::operators::BoxGeometry,
    constant: bool,
    key: Option<u64>,
    values: Vec<f64>,
}

impl<'a> PotentialCache<'a> {
    fn new(schedule: &'a PotentialSchedule, geometry: crate::operators::BoxGeometry) -> Self {
        Self {
            schedule,
            geometry,
            constant: schedule.is_piecewise_constant(),
            key: None,
            values: vec![0.0; geometry.site_count()],
        }
    }

    fn at(&mut self, t: f64, mid: f64) -> &[f64] {
        if self.constant {
            if self.key != Some(mid.to_bits()) {
                self.schedule.fill(mid, mid, &self.geometry, &mut self.values);
                self.key = Some(mid.to_bits());
            }
        } else {
            self.schedule.fill(t, mid, &self.geometry, &mut self.values);
        }
        &self.values
    }
}

/// Solves `i∂ₜu = (H₀ + V(t))u` from `u₀` at `t = 0`, returning snapshots at `output_times`.
pub fn evolve(
    kernel: &LatticeKernel,
    potential: &PotentialSchedule,
    u0: &WaveState,
    output_times: &[f64],
    settings: &IntegratorSettings,
) -> Result<Trajectory> {
    check_state(kernel, u0)?;
    potential.validate(kernel.geometry())?;
    let t_final = output_times.last().copied().unwrap_or(0.0);
    let pre = preflight(kernel, u0, t_final, settings.preflight)?;
    let geometry = *kernel.geometry();
    let matrix = kernel.matrix();
    let mut cache = PotentialCache::new(potential, geometry);
    let mut steps = settings.record_steps.then(Vec::new);
    let rhs = |t: f64, mid: f64, y: &[C64], dy: &mut [C64]| {
        let v = cache.at(t, mid);
        schrodinger_rhs(matrix, v, y, dy);
    };
    let (snaps, log) = integrate(
        &u0.amplitudes,
        0.0,
        output_times,
        &potential.breakpoints(0.0, t_final),
        settings,
        initial_step(kernel, potential.bound()),
        rhs,
        |t, y| {
            if let Some(s) = steps.as_mut() {
                s.push((t, y.to_vec()));
            }
        },
    )?;
    Ok(Trajectory {
        snapshots: to_states(geometry, snaps),
        steps,
        log,
        meta: TrajectoryMeta {
            kernel: kernel.spec().clone(),
            potential: potential.describe(),
            nonlinearity: None,
            settings: settings.clone(),
            preflight: pre,
            hypothesis_violation: None,
        },
    })
}

/// Solves `i∂ₜq = (H₀ + V̄(t) + |N(t,q)|)q`.
///
/// Amplitudes above the declared cap `c2` are flagged in
/// `meta.hypothesis_violation`; the run continues.
pub fn evolve_nls(
    kernel: &LatticeKernel,
    potential: &PotentialSchedule,
    nonlinearity: &NonlinearSpec,
    u0: &WaveState,
    output_times: &[f64],
    settings: &IntegratorSettings,
) -> Result<Trajectory> {
    check_state(kernel, u0)?;
    potential.validate(kernel.geometry())?;
    nonlinearity.validate()?;
    let t_final = output_times.last().copied().unwrap_or(0.0);
    let pre = preflight(kernel, u0, t_final, settings.preflight)?;
    let geometry = *kernel.geometry();
    let matrix = kernel.matrix();
    let mut cache = PotentialCache::new(potential, geometry);
    let mut full = vec![0.0; geometry.site_count()];
    let rhs = |t: f64, mid: f64, y: &[C64], dy: &mut [C64]| {
        let v = cache.at(t, mid);
        for ((f, &vi), &yi) in full.iter_mut().zip(v).zip(y) {
            *f = vi + nonlinearity.modulus(yi);
        }
        schrodinger_rhs(matrix, &full, y, dy);
    };
    let cap = nonlinearity.amplitude_cap();
    let mut worst: f64 = 0.0;
    let mut steps = settings.record_steps.then(Vec::new);
    let nl_bound = nonlinearity.sampled_sup(1.0, 16);
    let (snaps, log) = integrate(
        &u0.amplitudes,
        0.0,
        output_times,
        &potential.breakpoints(0.0, t_final),
        settings,
        initial_step(kernel, potential.bound() + nl_bound),
        rhs,
        |t, y| {
            worst = y.iter().map(|a| a.norm()).fold(worst, f64::max);
            if let Some(s) = steps.as_mut() {
                s.push((t, y.to_vec()));
            }
        },
    )?;
    Ok(Trajectory {
        snapshots: to_states(geometry, snaps),
        steps,
        log,
        meta: TrajectoryMeta {
            kernel: kernel.spec().clone(),
            potential: potential.describe(),
            nonlinearity: Some(*nonlinearity),
            settings: settings.clone(),
            preflight: pre,
            hypothesis_violation: (worst > cap).then_some(worst),
        },
    })
}

fn to_states(geometry: crate::operators::BoxGeometry, snaps: Vec<StepState>) -> Vec<WaveState> {
    snaps
        .into_iter()
        .map(|(t, amplitudes)| WaveState { geometry, amplitudes, t })
        .collect()
}

/// Observable at one time.
#[derive(Debug, Clone)]
pub enum Observable {
    /// Real multiplication operator.
    Diagonal(Vec<f64>),
    /// General operator; must be Hermitian.
    Operator(SparseMatrix),
}

/// `⟨u_t, A(t) u_t⟩` at each snapshot.
pub fn heisenberg_expectation<F>(trajectory: &Trajectory, mut observable: F) -> Result<Vec<f64>>
where
    F: FnMut(f64) -> Result<Observable>,
{
    trajectory
        .snapshots
        .iter()
        .map(|s| {
            let value = match observable(s.t)? {
                Observable::Diagonal(d) => {
                    if d.len() != s.amplitudes.len() {
                        return Err(Error::param("observable", "size does not match the state"));
                    }
                    C64::new(d.iter().zip(&s.amplitudes).map(|(w, a)| w * a.norm_sqr()).sum(), 0.0)
                }
                Observable::Operator(m) => {
                    let residue = m.hermitian_residue();
                    if residue > 1e-12 {
                        return Err(Error::NonHermitian { residue });
                    }
                    let mut au = vec![C64::new(0.0, 0.0); s.amplitudes.len()];
                    m.apply(&s.amplitudes, &mut au);
                    s.amplitudes.iter().zip(&au).map(|(a, b)| a.conj() * b).sum()
                }
            };
            if value.im.abs() > 1e-12 * value.re.abs().max(1.0) {
                return Err(Error::NonHermitian { residue: value.im.abs() });
            }
            Ok(value.re)
        })
        .collect()
}
