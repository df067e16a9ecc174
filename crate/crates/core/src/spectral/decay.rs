use serde::{Deserialize, Serialize};

use crate::observables::fit_line;
use crate::{Error, Result, C64};

use super::contour::{dunford_columns, ContourSpec};
use super::resolvent::{resolvent_column, StaticHamiltonian};

/// Resolvent values at or below this are treated as exact zeros.
pub const DECAY_FLOOR: f64 = 1e-300;

/// Prefactor in `|⟨R(z)δ_x, δ_y⟩| ≤ 2e^{-δ(r)/v}`.
pub const ENVELOPE_PREFACTOR: f64 = 2.0;

/// Largest accepted constant in the propagator shape check.
pub const SHAPE_CONSTANT_CAP: f64 = 2.0;

/// Decay profile `δ(r)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayModel {
    /// `δ(r) = r`.
    Exponential,
    /// `δ(r) = log(1 + r)`.
    Logarithmic,
}

impl DecayModel {
    pub fn delta(self, r: f64) -> f64 {
        match self {
            DecayModel::Exponential => r,
            DecayModel::Logarithmic => r.ln_1p(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DecayModel::Exponential => "exponential",
            DecayModel::Logarithmic => "logarithmic",
        }
    }
}

/// Regression of `log|⟨R(z)δ_x, δ_y⟩|` on `δ(|x - y|)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub model: DecayModel,
    pub z: C64,
    pub separations: Vec<f64>,
    pub log_values: Vec<f64>,
    /// `1/v_fit = -slope`.
    pub rate: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Largest rate with `|value| ≤ 2e^{-rate·δ(r)}` at every separation.
    pub envelope_rate: f64,
    /// Whether the fitted rate itself satisfies the envelope.
    pub envelope_holds: bool,
}

/// Resolvent decay along the first axis from site `x`, separations `1..=max_separation`.
///
/// Requires `dist(z, σ(H)) ≥ 1`. Separations leaving the box are dropped.
pub fn combes_thomas_fit(
    h: &StaticHamiltonian,
    z: C64,
    x: usize,
    max_separation: usize,
    model: DecayModel,
) -> Result<DecayFit> {
    let distance = h.spectral_distance(z)?;
    if distance < 1.0 - 1e-12 {
        return Err(Error::param("z", format!("dist(z, σ(H)) = {distance:.4} is below 1")));
    }
    let column = resolvent_column(h, z, x)?;
    let geometry = h.geometry();
    let mut coords = geometry.coords(x);
    let start = coords[0];
    let mut separations = Vec::new();
    let mut values = Vec::new();
    for r in 1..=max_separation {
        coords[0] = start + r as i64;
        let Some(y) = geometry.index_of(&coords) else { break };
        separations.push(r as f64);
        values.push(column[y].norm());
    }
    if separations.len() < 2 {
        return Err(Error::param("max_separation", "fewer than 2 separations fit in the box"));
    }
    let kept: Vec<(f64, f64)> = separations
        .iter()
        .zip(&values)
        .filter(|(_, &v)| v > DECAY_FLOOR)
        .map(|(&r, &v)| (r, v.ln()))
        .collect();
    if kept.len() < 2 {
        return Err(Error::DegenerateFit(format!(
            "{} of {} off-diagonal resolvent values are at the floor",
            separations.len() - kept.len(),
            separations.len()
        )));
    }
    let (separations, log_values): (Vec<f64>, Vec<f64>) = kept.into_iter().unzip();
    let xs: Vec<f64> = separations.iter().map(|&r| model.delta(r)).collect();
    let line = fit_line(&xs, &log_values)?;
    let ln2 = ENVELOPE_PREFACTOR.ln();
    let envelope_rate = xs
        .iter()
        .zip(&log_values)
        .map(|(d, lv)| (ln2 - lv) / d)
        .fold(f64::INFINITY, f64::min);
    let rate = -line.slope;
    Ok(DecayFit {
        model,
        z,
        separations,
        log_values,
        rate,
        intercept: line.intercept,
        r_squared: line.r_squared,
        envelope_rate,
        envelope_holds: rate <= envelope_rate + 1e-12,
    })
}

/// Result of `|⟨e^{-itH}δ_x, δ_y⟩| ≤ C e^{t - δ(r)·rate}` on a `(t, r)` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeReport {
    pub rate: f64,
    /// Smallest `C` valid on the whole grid.
    pub constant: f64,
    pub worst: (f64, f64),
    pub holds: bool,
}

/// Propagator shape check with the rate taken from a resolvent fit.
///
/// Propagator values come from the contour integral; the grid uses the
/// same separations as the fit.
pub fn propagator_shape_check(
    h: &StaticHamiltonian,
    x: usize,
    times: &[f64],
    fit: &DecayFit,
    contour: &ContourSpec,
) -> Result<ShapeReport> {
    let columns = dunford_columns(h, x, times, contour)?;
    let geometry = h.geometry();
    let mut coords = geometry.coords(x);
    let start = coords[0];
    let rate = fit.rate.min(fit.envelope_rate).max(0.0);
    let mut constant = 0.0f64;
    let mut worst = (0.0, 0.0);
    for (&t, col) in times.iter().zip(&columns) {
        for &r in &fit.separations {
            coords[0] = start + r as i64;
            let Some(y) = geometry.index_of(&coords) else { continue };
            let c = col[y].norm() * (rate * fit.model.delta(r) - t).exp();
            if c > constant {
                constant = c;
                worst = (t, r);
            }
        }
    }
    Ok(ShapeReport {
        rate,
        constant,
        worst,
        holds: constant <= SHAPE_CONSTANT_CAP,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{build_exponential_kernel, build_powerlaw_kernel, BoxGeometry, KernelFamily, KernelSpec};

    #[test]
    fn zero_hamiltonian_is_degenerate() {
        let k = KernelSpec {
            geometry: BoxGeometry::cube(1, 10).unwrap(),
            family: KernelFamily::PowerLaw {
                exponent: 2.0,
                coupling: 0.0,
            },
            floor: 1e-14,
        }
        .build()
        .unwrap();
        let h = StaticHamiltonian::free(&k);
        let err = combes_thomas_fit(&h, C64::new(2.0, 0.0), 10, 8, DecayModel::Exponential).unwrap_err();
        assert!(matches!(err, Error::DegenerateFit(_)));
    }

    #[test]
    fn too_close_to_spectrum_is_rejected() {
        let k = build_exponential_kernel(BoxGeometry::cube(1, 10).unwrap(), 1.0, 1.0).unwrap();
        let h = StaticHamiltonian::free(&k);
        let z = C64::new(0.0, 0.5);
        assert!(combes_thomas_fit(&h, z, 10, 5, DecayModel::Exponential).is_err());
    }

    #[test]
    fn exponential_kernel_prefers_exponential_model() {
        let g = BoxGeometry::cube(1, 64).unwrap();
        let k = build_exponential_kernel(g, 1.0, 1.0).unwrap();
        let v: Vec<f64> = (0..k.site_count()).map(|i| 0.5 * ((i as f64) * 0.37).sin()).collect();
        let h = StaticHamiltonian::with_potential(&k, &v).unwrap();
        let z = C64::new(h.norm().unwrap() + 1.5, 0.0);
        let e = combes_thomas_fit(&h, z, 64, 40, DecayModel::Exponential).unwrap();
        let l = combes_thomas_fit(&h, z, 64, 40, DecayModel::Logarithmic).unwrap();
        assert!(e.r_squared >= 0.99, "{}", e.r_squared);
        assert!(e.r_squared > l.r_squared);
        assert!(e.rate > 0.0 && e.rate <= 1.0 + 1e-9);
        assert!(e.envelope_rate > 0.0);
    }

    #[test]
    fn power_law_kernel_prefers_logarithmic_model() {
        let g = BoxGeometry::cube(1, 64).unwrap();
        let k = build_powerlaw_kernel(g, 4.0, 1.0).unwrap();
        let h = StaticHamiltonian::free(&k);
        let z = C64::new(h.norm().unwrap() + 1.5, 0.0);
        let e = combes_thomas_fit(&h, z, 64, 40, DecayModel::Exponential).unwrap();
        let l = combes_thomas_fit(&h, z, 64, 40, DecayModel::Logarithmic).unwrap();
        assert!(l.r_squared >= 0.95, "{}", l.r_squared);
        assert!(l.r_squared - e.r_squared >= 0.03);
    }

    #[test]
    fn shape_check_on_exponential_kernel() {
        let g = BoxGeometry::cube(1, 48).unwrap();
        let k = build_exponential_kernel(g, 1.0, 1.0).unwrap();
        let h = StaticHamiltonian::free(&k);
        let z = C64::new(h.norm().unwrap() + 1.5, 0.0);
        let fit = combes_thomas_fit(&h, z, 48, 30, DecayModel::Exponential).unwrap();
        let times = [0.5, 1.0, 2.0, 3.0, 4.0, 5.0];
        let rep = propagator_shape_check(&h, 48, &times, &fit, &ContourSpec::default()).unwrap();
        assert!(rep.holds, "{rep:?}");
    }
}
