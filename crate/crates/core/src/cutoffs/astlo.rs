use serde::{Deserialize, Serialize};

use super::{BumpFunction, SmoothedStep};
use crate::{Error, Result};

/// How the adiabatic parameter `s` depends on time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Schedule {
    /// Constant `s`.
    Fixed { s: f64 },
    /// `s(t) = λt`; at `t = 0` the reference `s₀ = λ·t_ref` is used instead.
    Linear { t_ref: f64 },
}

/// Speeds, exponent and schedule of the adiabatic space-time localization observables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AstloParams {
    pub v_bar: f64,
    pub v: f64,
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default)]
    pub radius: f64,
    #[serde(default = "one")]
    pub epsilon: f64,
    pub schedule: Schedule,
}

fn one() -> f64 {
    1.0
}

impl AstloParams {
    pub fn linear(v_bar: f64, v: f64, alpha: f64, epsilon: f64, t_ref: f64) -> Result<Self> {
        let p = Self {
            v_bar,
            v,
            alpha,
            radius: 0.0,
            epsilon,
            schedule: Schedule::Linear { t_ref },
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v_bar > 0.0) {
            return Err(Error::param("v_bar", format!("must be positive, got {}", self.v_bar)));
        }
        if !(self.v > self.v_bar) {
            return Err(Error::param("v", format!("must exceed v_bar = {}, got {}", self.v_bar, self.v)));
        }
        if !(self.alpha > 0.5 && self.alpha <= 1.0) {
            return Err(Error::param("alpha", format!("must lie in (1/2, 1], got {}", self.alpha)));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::param("epsilon", format!("must be positive, got {}", self.epsilon)));
        }
        if !(self.radius >= 0.0) {
            return Err(Error::param("radius", format!("must be nonnegative, got {}", self.radius)));
        }
        match self.schedule {
            Schedule::Fixed { s } if !(s > 0.0) => Err(Error::param("s", format!("must be positive, got {s}"))),
            Schedule::Linear { t_ref } if !(t_ref > 0.0) => {
                Err(Error::param("t_ref", format!("must be positive, got {t_ref}")))
            }
            _ => Ok(()),
        }
    }

    /// `λ = ((v - v̄)/ε)^{1/α}`.
    pub fn lambda(&self) -> f64 {
        ((self.v - self.v_bar) / self.epsilon).powf(1.0 / self.alpha)
    }

    /// The adiabatic parameter in effect at time `t`.
    pub fn s_at(&self, t: f64) -> f64 {
        match self.schedule {
            Schedule::Fixed { s } => s,
            Schedule::Linear { t_ref } => self.lambda() * if t > 0.0 { t } else { t_ref },
        }
    }

    /// `(φ - v̄t^α)/s^α` with `s` given explicitly.
    pub fn argument_with_s(&self, phi: f64, t: f64, s: f64) -> f64 {
        (phi - self.v_bar * t.powf(self.alpha)) / s.powf(self.alpha)
    }

    /// `(φ - v̄t^α)/s(t)^α`.
    pub fn argument(&self, phi: f64, t: f64) -> f64 {
        self.argument_with_s(phi, t, self.s_at(t))
    }

    fn is_linear(&self) -> bool {
        matches!(self.schedule, Schedule::Linear { .. })
    }
}

/// Site values `f((φ(x) - v̄t^α)/s^α)` with `s = s(t)`.
pub fn astlo_field<F: Fn(f64) -> f64>(f: F, phi: &[f64], params: &AstloParams, t: f64) -> Result<Vec<f64>> {
    let s = params.s_at(t);
    astlo_field_with_s(f, phi, params, t, s)
}

/// Site values `f((φ(x) - v̄t^α)/s^α)` for an explicit `s`.
pub fn astlo_field_with_s<F: Fn(f64) -> f64>(
    f: F,
    phi: &[f64],
    params: &AstloParams,
    t: f64,
    s: f64,
) -> Result<Vec<f64>> {
    if !(t >= 0.0) {
        return Err(Error::param("t", format!("must be nonnegative, got {t}")));
    }
    if !(s > 0.0) {
        return Err(Error::param("s", format!("adiabatic parameter must be positive, got {s}")));
    }
    Ok(phi.iter().map(|&p| f(params.argument_with_s(p, t, s))).collect())
}

/// Largest violation of the geometric sandwich at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub t: f64,
    /// `max(lower - upper)` over sites; at most 0 when the sandwich holds.
    pub max_violation: f64,
    pub violating_sites: usize,
    /// `s` used, which at `t = 0` is the reference value `λ·t_ref`.
    pub s: f64,
}

impl SandwichReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.max_violation <= tol
    }
}

/// At `t = 0`: `χ-field/sup χ ≤ 1{φ > 0}`. At `t > 0`: `1{φ > vt^α} ≤ χ-field/sup χ`.
pub fn sandwich_check(chi: &SmoothedStep, phi: &[f64], params: &AstloParams, t: f64) -> Result<SandwichReport> {
    if !params.is_linear() {
        return Err(Error::param("schedule", "sandwich check needs the linear schedule"));
    }
    let field = astlo_field(|x| chi.normalized(x), phi, params, t)?;
    let ind = |b: bool| if b { 1.0 } else { 0.0 };
    let front = params.v * t.powf(params.alpha);
    let gaps: Vec<f64> = phi
        .iter()
        .zip(&field)
        .map(|(&p, &f)| if t == 0.0 { f - ind(p > 0.0) } else { ind(p > front) - f })
        .collect();
    const TOL: f64 = 1e-12;
    Ok(SandwichReport {
        t,
        max_violation: gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        violating_sites: gaps.iter().filter(|&&g| g > TOL).count(),
        s: params.s_at(t),
    })
}

/// Support and plateau of the bump window `w((φ - v̄t^α)/s^α)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub t: f64,
    /// Largest `|w-field|` on sites outside `{v̄t^α ≤ φ ≤ vt^α}`.
    pub outside_max: f64,
    /// Largest `1 - w-field` on sites inside the plateau band.
    pub plateau_deficit: f64,
    pub window_sites: usize,
    pub plateau_sites: usize,
}

impl WindowReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.outside_max <= tol && self.plateau_deficit <= tol
    }
}

/// Checks the window field against the support and plateau bands.
pub fn window_check(w: &BumpFunction, phi: &[f64], params: &AstloParams, t: f64) -> Result<WindowReport> {
    if !params.is_linear() {
        return Err(Error::param("schedule", "window check needs the linear schedule"));
    }
    if !(t > 0.0) {
        return Err(Error::param("t", "window check needs t > 0"));
    }
    let field = astlo_field(|x| w.value(x), phi, params, t)?;
    let ta = t.powf(params.alpha);
    let (vb, v) = (params.v_bar, params.v);
    let lo = (0.25 * v + 0.75 * vb) * ta;
    let hi = (0.75 * v + 0.25 * vb) * ta;
    let slack = 1e-12 * v * ta.max(1.0);
    let mut r = WindowReport {
        t,
        outside_max: 0.0,
        plateau_deficit: 0.0,
        window_sites: 0,
        plateau_sites: 0,
    };
    for (&p, &f) in phi.iter().zip(&field) {
        if p < vb * ta - slack || p > v * ta + slack {
            r.outside_max = r.outside_max.max(f.abs());
        } else {
            r.window_sites += 1;
        }
        if p >= lo + slack && p <= hi - slack {
            r.plateau_sites += 1;
            r.plateau_deficit = r.plateau_deficit.max(1.0 - f);
        }
    }
    Ok(r)
}
