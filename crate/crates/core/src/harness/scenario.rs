use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cutoffs::CutoffSpec;
use crate::dynamics::{hex, InitialProfile, IntegratorSettings, NonlinearSpec, PotentialSchedule, WaveState};
use crate::observables::TRANSPORT_FINITE_CAP;
use crate::operators::{structural_constants, KernelFamily, KernelSpec, LatticeKernel};
use crate::spectral::{ContourSpec, DecayModel, MIN_CONTOUR_NODES};
use crate::{Error, Result, C64};

/// Initial data, including explicit amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialState {
    Delta,
    Gaussian {
        width: f64,
        #[serde(default)]
        momentum: f64,
    },
    PowerTail {
        exponent: f64,
    },
    /// Site amplitudes in row-major order; normalized on build.
    Explicit {
        re: Vec<f64>,
        #[serde(default)]
        im: Vec<f64>,
    },
}

impl InitialState {
    pub fn build(&self, kernel: &LatticeKernel) -> Result<WaveState> {
        let g = *kernel.geometry();
        match self {
            InitialState::Delta => InitialProfile::Delta.build(g),
            InitialState::Gaussian { width, momentum } => InitialProfile::Gaussian {
                width: *width,
                momentum: *momentum,
            }
            .build(g),
            InitialState::PowerTail { exponent } => InitialProfile::PowerTail { exponent: *exponent }.build(g),
            InitialState::Explicit { re, im } => {
                let amps = re
                    .iter()
                    .enumerate()
                    .map(|(i, &r)| C64::new(r, im.get(i).copied().unwrap_or(0.0)))
                    .collect();
                WaveState::from_amplitudes(g, amps)
            }
        }
    }
}

/// Output times `0, step, 2·step, ..., t_final`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_final: f64,
    pub step: f64,
}

impl Default for TimeGrid {
    fn default() -> Self {
        TimeGrid {
            t_final: 10.0,
            step: 0.5,
        }
    }
}

impl TimeGrid {
    pub fn count(&self) -> usize {
        (self.t_final / self.step).round() as usize
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.count()).map(|k| k as f64 * self.step).collect()
    }
}

/// A time window `[start, end]`.
pub type Window = (f64, f64);

fn default_rs_tolerance() -> f64 {
    1e-6
}
fn default_order() -> usize {
    4
}
fn default_lightcone_window() -> Window {
    (3.0, 12.0)
}
fn default_astlo_t_min() -> f64 {
    5.0
}
fn default_t_ref() -> f64 {
    0.5
}
fn default_replay_tolerance() -> f64 {
    1e-8
}
fn default_transport_alphas() -> Vec<f64> {
    vec![0.6, 0.75, 0.9, 1.0]
}
fn default_transport_window() -> Window {
    (4.0, 16.0)
}
fn default_finite_cap() -> f64 {
    TRANSPORT_FINITE_CAP
}
fn default_max_separation() -> usize {
    40
}
fn default_z_offset() -> f64 {
    1.5
}
fn default_min_r_squared() -> f64 {
    0.99
}
fn default_dunford_times() -> Vec<f64> {
    vec![1.0, 2.5, 5.0]
}
fn default_dunford_range() -> usize {
    30
}
fn default_dunford_tolerance() -> f64 {
    1e-6
}
fn default_orders() -> Vec<usize> {
    vec![1, 2, 3]
}
fn default_sigmas() -> Vec<f64> {
    vec![4.0, 8.0, 16.0, 32.0, 64.0]
}
fn default_slope_tolerance() -> f64 {
    0.15
}
fn default_gap_tolerance() -> f64 {
    0.2
}
fn default_geometry_tolerance() -> f64 {
    1e-12
}
fn one() -> f64 {
    1.0
}

/// A requested bound check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Check {
    /// `‖|x|u_t‖ ≤ ‖|x|u₀‖ + Ct`, with `C = κ` unless given.
    RadinSimon {
        #[serde(default)]
        constant: Option<f64>,
        #[serde(default = "default_rs_tolerance")]
        tolerance: f64,
    },
    /// Front condition at `(v, δ, α)` and the light cone `vt^α + R`.
    Thm1 {
        v: f64,
        delta: f64,
        #[serde(default = "one")]
        alpha: f64,
        #[serde(default)]
        radius: f64,
        #[serde(default = "default_order")]
        order: usize,
        #[serde(default = "default_lightcone_window")]
        window: Window,
    },
    /// Linear light cone `vt + R` for `v > κ`.
    Thm2 {
        v: f64,
        #[serde(default)]
        radius: f64,
        #[serde(default = "default_order")]
        order: usize,
        #[serde(default = "default_lightcone_window")]
        window: Window,
        /// Required `P(vt + R, t) ≤ tail_max` on `tail_window`.
        #[serde(default)]
        tail_max: Option<f64>,
        #[serde(default)]
        tail_window: Option<Window>,
        /// Required fitted decay exponent on `window`.
        #[serde(default)]
        min_exponent: Option<f64>,
    },
    /// Uniform moment bound `P_r(2vt, t) ≤ C`.
    Thm3 {
        r: f64,
        r0: f64,
        v: f64,
        fit_end: f64,
    },
    /// Nonlinear light cone and frozen-coefficient replay.
    Nls {
        v: f64,
        #[serde(default = "default_lightcone_window")]
        window: Window,
        #[serde(default)]
        tail_max: Option<f64>,
        #[serde(default)]
        tail_window: Option<Window>,
        #[serde(default = "default_replay_tolerance")]
        replay_tolerance: f64,
    },
    /// Resolvent decay fit at `z = ‖H‖ + z_offset` from the origin.
    CombesThomas {
        model: DecayModel,
        #[serde(default = "default_max_separation")]
        max_separation: usize,
        #[serde(default = "default_z_offset")]
        z_offset: f64,
        #[serde(default = "default_min_r_squared")]
        min_r_squared: f64,
        /// Times for the propagator shape check; skipped when empty.
        #[serde(default)]
        shape_times: Vec<f64>,
    },
    /// Contour propagator against the dense exponential.
    Dunford {
        #[serde(default)]
        contour: ContourSpec,
        #[serde(default = "default_dunford_times")]
        times: Vec<f64>,
        /// Compare sites with `|y - x| ≤ range` along the first axis.
        #[serde(default = "default_dunford_range")]
        range: usize,
        #[serde(default = "default_dunford_tolerance")]
        tolerance: f64,
    },
    /// Expansion remainder slopes over a σ sweep.
    Expansion {
        #[serde(default = "default_orders")]
        orders: Vec<usize>,
        #[serde(default = "default_sigmas")]
        sigmas: Vec<f64>,
        #[serde(default)]
        cutoff: CutoffSpec,
        #[serde(default = "default_slope_tolerance")]
        slope_tolerance: f64,
        /// Also fit the leading-term gap against slope `-2`.
        #[serde(default)]
        gap: bool,
        #[serde(default = "default_gap_tolerance")]
        gap_tolerance: f64,
    },
    /// `S⁺(α)` over a grid and the upper transport exponent.
    Transport {
        #[serde(default = "default_transport_alphas")]
        alphas: Vec<f64>,
        #[serde(default = "default_transport_window")]
        window: Window,
        #[serde(default = "default_finite_cap")]
        finite_cap: f64,
    },
    /// ASTLO monotonicity residual with the linear schedule.
    Astlo {
        v: f64,
        v_bar: f64,
        #[serde(default = "one")]
        alpha: f64,
        #[serde(default)]
        cutoff: CutoffSpec,
        #[serde(default = "default_t_ref")]
        t_ref: f64,
        #[serde(default = "default_astlo_t_min")]
        t_min: f64,
        #[serde(default = "default_rs_tolerance")]
        tolerance: f64,
    },
    /// Sandwich and window checks on every site over `(α, v̄, v)` grids.
    Geometry {
        alphas: Vec<f64>,
        /// Pairs `(v̄, v)`.
        speeds: Vec<(f64, f64)>,
        #[serde(default)]
        cutoff: CutoffSpec,
        #[serde(default = "default_t_ref")]
        t_ref: f64,
        #[serde(default = "default_geometry_tolerance")]
        tolerance: f64,
    },
}

impl Check {
    pub fn name(&self) -> &'static str {
        match self {
            Check::RadinSimon { .. } => "radin_simon",
            Check::Thm1 { .. } => "thm1",
            Check::Thm2 { .. } => "thm2",
            Check::Thm3 { .. } => "thm3",
            Check::Nls { .. } => "nls",
            Check::CombesThomas { .. } => "combes_thomas",
            Check::Dunford { .. } => "dunford",
            Check::Expansion { .. } => "expansion",
            Check::Transport { .. } => "transport",
            Check::Astlo { .. } => "astlo",
            Check::Geometry { .. } => "geometry",
        }
    }

    /// Whether the check consumes the simulated trajectory.
    pub fn needs_trajectory(&self) -> bool {
        !matches!(
            self,
            Check::CombesThomas { .. } | Check::Dunford { .. } | Check::Expansion { .. } | Check::Geometry { .. }
        )
    }
}

/// A complete experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    pub kernel: KernelSpec,
    #[serde(default = "zero_potential")]
    pub potential: PotentialSchedule,
    #[serde(default)]
    pub nonlinearity: Option<NonlinearSpec>,
    #[serde(default = "delta_state")]
    pub initial: InitialState,
    #[serde(default)]
    pub time: TimeGrid,
    #[serde(default)]
    pub integrator: IntegratorSettings,
    #[serde(default)]
    pub checks: Vec<Check>,
    /// Output directory; relative paths resolve against the output root.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn zero_potential() -> PotentialSchedule {
    PotentialSchedule::Zero
}
fn delta_state() -> InitialState {
    InitialState::Delta
}

/// Prefixes a parameter or validation error with a config path.
fn at(path: impl Into<String>, e: Error) -> Error {
    let path = path.into();
    match e {
        Error::Parameter { name, reason } => Error::validation(format!("{path}.{name}"), reason),
        Error::Validation { path: inner, message } => Error::validation(format!("{path}.{inner}"), message),
        other => Error::validation(path, other.to_string()),
    }
}

fn require(cond: bool, path: String, message: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::validation(path, message))
    }
}

fn window_ok(w: Window) -> bool {
    w.0.is_finite() && w.1.is_finite() && w.0 >= 0.0 && w.1 > w.0
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::validation("<scenario>", e.to_string()))
    }

    /// SHA-256 of the canonical JSON form (keys sorted).
    pub fn hash(&self) -> Result<String> {
        let value = serde_json::to_value(self)?;
        let canonical = serde_json::to_string(&value)?;
        Ok(hex(&Sha256::digest(canonical.as_bytes())))
    }

    /// Checks every field; errors name the offending path.
    pub fn validate(&self) -> Result<()> {
        require(
            !self.id.is_empty() && self.id.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)),
            "id".into(),
            "must be non-empty and use only [A-Za-z0-9._-]",
        )?;
        self.kernel.geometry.validate().map_err(|e| at("kernel.geometry", e))?;
        if let KernelFamily::Custom { .. } = self.kernel.family {
            return Err(Error::validation("kernel.family", "custom kernels cannot be configured"));
        }
        let kernel = self.kernel.build().map_err(|e| at("kernel", e))?;
        self.potential
            .validate(kernel.geometry())
            .map_err(|e| at("potential", e))?;
        if let Some(nl) = &self.nonlinearity {
            nl.validate().map_err(|e| at("nonlinearity", e))?;
        }
        self.initial.build(&kernel).map_err(|e| at("initial", e))?;
        let t = self.time;
        require(t.step > 0.0 && t.step.is_finite(), "time.step".into(), "must be positive")?;
        require(t.t_final > 0.0 && t.t_final.is_finite(), "time.t_final".into(), "must be positive")?;
        require(
            ((t.t_final / t.step) - (t.count() as f64)).abs() < 1e-9,
            "time.t_final".into(),
            "must be a multiple of time.step",
        )?;
        self.integrator.validate().map_err(|e| at("integrator", e))?;
        let kappa = structural_constants(&kernel, 1)?.kappa;
        for (i, c) in self.checks.iter().enumerate() {
            self.validate_check(i, c, kappa, &kernel)?;
        }
        let mut seen = std::collections::BTreeSet::new();
        for (i, c) in self.checks.iter().enumerate() {
            require(
                seen.insert(c.name()),
                format!("checks[{i}].kind"),
                format!("check `{}` requested twice", c.name()),
            )?;
        }
        Ok(())
    }

    fn validate_check(&self, i: usize, c: &Check, kappa: f64, kernel: &LatticeKernel) -> Result<()> {
        let p = |f: &str| format!("checks[{i}].{f}");
        let t_final = self.time.t_final;
        let in_run = |w: Window| w.1 <= t_final + 1e-12;
        let cone = |v: f64| {
            require(
                v > kappa,
                p("v"),
                format!("light-cone speed must exceed κ = {kappa} (got {v})"),
            )
        };
        let windows = |w: Window, name: &str| {
            require(window_ok(w), p(name), "must be an increasing pair of nonnegative times")?;
            require(in_run(w), p(name), format!("ends after time.t_final = {t_final}"))
        };
        match c {
            Check::RadinSimon { constant, tolerance } => {
                if let Some(k) = constant {
                    require(*k >= 0.0, p("constant"), "must be nonnegative")?;
                }
                require(*tolerance >= 0.0, p("tolerance"), "must be nonnegative")
            }
            Check::Thm1 {
                v,
                delta,
                alpha,
                order,
                window,
                radius,
            } => {
                require(*alpha > 0.5 && *alpha <= 1.0, p("alpha"), "must lie in (1/2, 1]")?;
                require(*delta > 0.0, p("delta"), "must be positive")?;
                require(*v > delta / alpha, p("v"), "must exceed delta/alpha")?;
                require(*order >= 1, p("order"), "must be at least 1")?;
                require(*radius >= 0.0, p("radius"), "must be nonnegative")?;
                windows(*window, "window")
            }
            Check::Thm2 {
                v,
                radius,
                order,
                window,
                tail_max,
                tail_window,
                min_exponent,
            } => {
                cone(*v)?;
                require(*radius >= 0.0, p("radius"), "must be nonnegative")?;
                require(*order >= 1, p("order"), "must be at least 1")?;
                windows(*window, "window")?;
                if let Some(w) = tail_window {
                    windows(*w, "tail_window")?;
                }
                if let Some(m) = tail_max {
                    require(*m > 0.0, p("tail_max"), "must be positive")?;
                }
                if let Some(e) = min_exponent {
                    require(e.is_finite(), p("min_exponent"), "must be finite")?;
                }
                Ok(())
            }
            Check::Thm3 { r, r0, v, fit_end } => {
                cone(*v)?;
                require(*r >= 0.0 && r < r0, p("r"), "need 0 <= r < r0")?;
                require(*fit_end >= 1.0 && *fit_end <= t_final, p("fit_end"), "must lie in [1, time.t_final]")
            }
            Check::Nls {
                v,
                window,
                tail_window,
                tail_max,
                replay_tolerance,
            } => {
                require(
                    self.nonlinearity.is_some(),
                    "nonlinearity".into(),
                    "an nls check needs a nonlinearity",
                )?;
                cone(*v)?;
                windows(*window, "window")?;
                if let Some(w) = tail_window {
                    windows(*w, "tail_window")?;
                }
                if let Some(m) = tail_max {
                    require(*m > 0.0, p("tail_max"), "must be positive")?;
                }
                require(*replay_tolerance > 0.0, p("replay_tolerance"), "must be positive")
            }
            Check::CombesThomas {
                max_separation,
                z_offset,
                min_r_squared,
                shape_times,
                ..
            } => {
                self.require_static(i)?;
                require(*max_separation >= 2, p("max_separation"), "must be at least 2")?;
                require(
                    *max_separation <= kernel.geometry().half_width,
                    p("max_separation"),
                    "exceeds the box half-width",
                )?;
                require(*z_offset >= 1.0, p("z_offset"), "dist(z, spectrum) must be at least 1")?;
                require((0.0..=1.0).contains(min_r_squared), p("min_r_squared"), "must lie in [0, 1]")?;
                require(
                    shape_times.iter().all(|t| t.is_finite() && *t >= 0.0),
                    p("shape_times"),
                    "must be nonnegative",
                )
            }
            Check::Dunford {
                contour,
                times,
                range,
                tolerance,
            } => {
                self.require_static(i)?;
                require(contour.nodes >= MIN_CONTOUR_NODES, p("contour.nodes"), format!("need at least {MIN_CONTOUR_NODES}"))?;
                require(contour.half_height > 0.0, p("contour.half_height"), "must be positive")?;
                require(!times.is_empty(), p("times"), "must not be empty")?;
                require(times.iter().all(|t| t.is_finite()), p("times"), "must be finite")?;
                require(*range >= 1, p("range"), "must be at least 1")?;
                require(*tolerance > 0.0, p("tolerance"), "must be positive")
            }
            Check::Expansion {
                orders,
                sigmas,
                cutoff,
                slope_tolerance,
                gap_tolerance,
                ..
            } => {
                require(
                    matches!(self.kernel.family, KernelFamily::Laplacian | KernelFamily::Exponential { .. } | KernelFamily::PowerLaw { .. }),
                    "kernel.family".into(),
                    "unsupported",
                )?;
                cutoff.build().map_err(|e| at(p("cutoff"), e))?;
                require(!orders.is_empty(), p("orders"), "must not be empty")?;
                for (j, &n) in orders.iter().enumerate() {
                    require(
                        n >= 1 && n <= cutoff.n_max + 1,
                        format!("checks[{i}].orders[{j}]"),
                        format!("order must lie in [1, cutoff.n_max + 1 = {}]", cutoff.n_max + 1),
                    )?;
                }
                require(sigmas.len() >= 2, p("sigmas"), "need at least two values")?;
                require(sigmas.iter().all(|&s| s > 0.0), p("sigmas"), "must be positive")?;
                let widest = sigmas.iter().copied().fold(0.0, f64::max) * cutoff.epsilon;
                let phi_max = kernel.geometry().max_radius();
                require(
                    widest <= phi_max,
                    p("sigmas"),
                    format!("window σε = {widest} does not fit in the box (max |x| = {phi_max})"),
                )?;
                require(*slope_tolerance > 0.0, p("slope_tolerance"), "must be positive")?;
                require(*gap_tolerance > 0.0, p("gap_tolerance"), "must be positive")
            }
            Check::Transport {
                alphas,
                window,
                finite_cap,
            } => {
                require(!alphas.is_empty(), p("alphas"), "must not be empty")?;
                require(alphas.iter().all(|&a| a > 0.0 && a <= 1.0), p("alphas"), "must lie in (0, 1]")?;
                require(*finite_cap > 0.0, p("finite_cap"), "must be positive")?;
                windows(*window, "window")
            }
            Check::Astlo {
                v,
                v_bar,
                alpha,
                cutoff,
                t_ref,
                t_min,
                tolerance,
            } => {
                crate::cutoffs::AstloParams::linear(*v_bar, *v, *alpha, cutoff.epsilon, *t_ref).map_err(|e| at(format!("checks[{i}]"), e))?;
                cutoff.build().map_err(|e| at(p("cutoff"), e))?;
                require(*t_min >= 0.0 && *t_min <= t_final, p("t_min"), "must lie in [0, time.t_final]")?;
                require(*tolerance >= 0.0, p("tolerance"), "must be nonnegative")
            }
            Check::Geometry {
                alphas,
                speeds,
                cutoff,
                t_ref,
                tolerance,
            } => {
                cutoff.build().map_err(|e| at(p("cutoff"), e))?;
                require(!alphas.is_empty(), p("alphas"), "must not be empty")?;
                require(!speeds.is_empty(), p("speeds"), "must not be empty")?;
                for &a in alphas {
                    for &(vb, v) in speeds {
                        crate::cutoffs::AstloParams::linear(vb, v, a, cutoff.epsilon, *t_ref)
                            .map_err(|e| at(format!("checks[{i}]"), e))?;
                    }
                }
                require(*tolerance >= 0.0, p("tolerance"), "must be nonnegative")
            }
        }
    }

    fn require_static(&self, i: usize) -> Result<()> {
        require(
            matches!(self.potential, PotentialSchedule::Zero | PotentialSchedule::Static { .. }),
            "potential".into(),
            format!("checks[{i}] needs a static potential"),
        )?;
        require(
            self.nonlinearity.is_none(),
            "nonlinearity".into(),
            format!("checks[{i}] needs a linear Hamiltonian"),
        )
    }

    /// Output directory for this scenario under `root`.
    pub fn output_dir(&self, root: &Path) -> PathBuf {
        match &self.output {
            Some(p) if p.is_absolute() => p.clone(),
            Some(p) => root.join(p),
            None => root.join(&self.id),
        }
    }

    /// Applies `value` at a dotted path such as `potential.seed` or `checks.0.v`.
    pub fn with_override(&self, path: &str, value: &serde_json::Value) -> Result<Self> {
        let mut doc = serde_json::to_value(self)?;
        let mut cur = &mut doc;
        let parts: Vec<&str> = path.split('.').collect();
        for (k, part) in parts.iter().enumerate() {
            let last = k + 1 == parts.len();
            let here = parts[..=k].join(".");
            cur = match cur {
                serde_json::Value::Object(map) => {
                    if last {
                        map.insert((*part).to_string(), value.clone());
                        break;
                    }
                    map.get_mut(*part)
                        .ok_or_else(|| Error::validation(here, "no such field"))?
                }
                serde_json::Value::Array(items) => {
                    let idx: usize = part
                        .parse()
                        .map_err(|_| Error::validation(here.clone(), "expected an array index"))?;
                    let len = items.len();
                    let slot = items
                        .get_mut(idx)
                        .ok_or_else(|| Error::validation(here, format!("index out of range (len {len})")))?;
                    if last {
                        *slot = value.clone();
                        break;
                    }
                    slot
                }
                _ => return Err(Error::validation(here, "cannot descend into a scalar")),
            };
        }
        let s: Scenario = serde_json::from_value(doc).map_err(|e| Error::validation(path, e.to_string()))?;
        s.validate()?;
        Ok(s)
    }
}
