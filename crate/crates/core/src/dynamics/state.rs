use serde::{Deserialize, Serialize};

use crate::operators::BoxGeometry;
use crate::{Error, Result, C64};

/// Amplitude field `u_t` on the box sites at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveState {
    pub geometry: BoxGeometry,
    pub amplitudes: Vec<C64>,
    pub t: f64,
}

/// Named initial data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialProfile {
    /// `δ₀`.
    Delta,
    /// `exp(-|x|²/(4w²) + i k·x₁)`, normalized.
    Gaussian {
        width: f64,
        #[serde(default)]
        momentum: f64,
    },
    /// `(1 + |x|)^{-exponent}`, normalized.
    PowerTail { exponent: f64 },
}

impl InitialProfile {
    pub fn build(&self, geometry: BoxGeometry) -> Result<WaveState> {
        match *self {
            InitialProfile::Delta => Ok(WaveState::delta(geometry)),
            InitialProfile::Gaussian { width, momentum } => WaveState::gaussian(geometry, width, momentum),
            InitialProfile::PowerTail { exponent } => WaveState::power_tail(geometry, exponent),
        }
    }
}

impl WaveState {
    /// Normalized state from raw amplitudes.
    pub fn from_amplitudes(geometry: BoxGeometry, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != geometry.site_count() {
            return Err(Error::param(
                "amplitudes",
                format!("expected {} entries, got {}", geometry.site_count(), amplitudes.len()),
            ));
        }
        let mut s = Self {
            geometry,
            amplitudes,
            t: 0.0,
        };
        let n = s.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::param("amplitudes", "state has zero or non-finite norm"));
        }
        s.scale(1.0 / n);
        Ok(s)
    }

    /// Unit mass at the origin.
    pub fn delta(geometry: BoxGeometry) -> Self {
        Self::delta_at(geometry, geometry.origin())
    }

    pub fn delta_at(geometry: BoxGeometry, site: usize) -> Self {
        let mut amplitudes = vec![C64::new(0.0, 0.0); geometry.site_count()];
        amplitudes[site] = C64::new(1.0, 0.0);
        Self {
            geometry,
            amplitudes,
            t: 0.0,
        }
    }

    pub fn gaussian(geometry: BoxGeometry, width: f64, momentum: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::param("width", format!("must be positive, got {width}")));
        }
        let amps = (0..geometry.site_count())
            .map(|i| {
                let r = geometry.norm_of(i);
                let x1 = geometry.coord(i, 0) as f64;
                C64::from_polar((-r * r / (4.0 * width * width)).exp(), momentum * x1)
            })
            .collect();
        Self::from_amplitudes(geometry, amps)
    }

    pub fn power_tail(geometry: BoxGeometry, exponent: f64) -> Result<Self> {
        if !(exponent > 0.0) {
            return Err(Error::param("exponent", format!("must be positive, got {exponent}")));
        }
        let amps = (0..geometry.site_count())
            .map(|i| C64::new((1.0 + geometry.norm_of(i)).powf(-exponent), 0.0))
            .collect();
        Self::from_amplitudes(geometry, amps)
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&mut self, s: f64) {
        for a in self.amplitudes.iter_mut() {
            *a *= s;
        }
    }

    /// `|u(x)|²` per site.
    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `‖u - other‖₂`.
    pub fn distance(&self, other: &WaveState) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest `|u(x)|`.
    pub fn max_amplitude(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Smallest radius `R` with `Σ_{|x| > R} |u(x)|² ≤ tol`.
    pub fn effective_radius(&self, tol: f64) -> f64 {
        let mut by_radius: Vec<(f64, f64)> = (0..self.amplitudes.len())
            .map(|i| (self.geometry.norm_of(i), self.amplitudes[i].norm_sqr()))
            .collect();
        by_radius.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut tail = 0.0;
        for (k, &(r, m)) in by_radius.iter().enumerate() {
            tail += m;
            if tail > tol {
                return r;
            }
            if k + 1 == by_radius.len() {
                return 0.0;
            }
        }
        0.0
    }
}
