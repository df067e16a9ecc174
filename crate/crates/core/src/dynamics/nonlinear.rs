use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// Nonlinearity `N(t, q)`; its modulus enters the equation as a real diagonal term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NonlinearSpec {
    /// `N = g|q|^{p-1}` with declared `|N| ≤ c1` whenever `|q| ≤ c2`.
    Power { g: f64, p: f64, c1: f64, c2: f64 },
}

impl NonlinearSpec {
    /// Cubic nonlinearity `g|q|²` with constants tight at `|q| ≤ 1`.
    pub fn cubic(g: f64) -> Self {
        NonlinearSpec::Power {
            g,
            p: 3.0,
            c1: g.abs(),
            c2: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let NonlinearSpec::Power { g, p, c1, c2 } = *self;
        if !(p > 1.0) {
            return Err(Error::param("p", format!("must exceed 1, got {p}")));
        }
        if !(c2 > 0.0) || !(c1 >= 0.0) || !g.is_finite() {
            return Err(Error::param("c1", "need finite g, c1 >= 0 and c2 > 0"));
        }
        let worst = self.sampled_sup(c2, 257);
        if worst > c1 * (1.0 + 1e-12) {
            return Err(Error::param(
                "c1",
                format!("|N| reaches {worst:.6e} on |q| <= {c2}, above the declared {c1}"),
            ));
        }
        Ok(())
    }

    /// `|N(t, q)|`.
    pub fn modulus(&self, q: C64) -> f64 {
        let NonlinearSpec::Power { g, p, .. } = *self;
        g.abs() * q.norm().powf(p - 1.0)
    }

    /// `d/dt |N(q(t))|` given `q` and `q̇`.
    pub fn modulus_rate(&self, q: C64, qdot: C64) -> f64 {
        let NonlinearSpec::Power { g, p, .. } = *self;
        let r2 = q.norm_sqr();
        if r2 == 0.0 {
            return 0.0;
        }
        // d|q|^{p-1}/dt = (p-1)|q|^{p-3} Re(q̄ q̇)
        g.abs() * (p - 1.0) * r2.powf(0.5 * (p - 3.0)) * (q.conj() * qdot).re
    }

    pub fn is_off(&self) -> bool {
        let NonlinearSpec::Power { g, .. } = *self;
        g == 0.0
    }

    pub fn amplitude_cap(&self) -> f64 {
        let NonlinearSpec::Power { c2, .. } = *self;
        c2
    }

    /// Largest `|N|` sampled over the disc `|q| ≤ radius` (radial and angular grid).
    pub fn sampled_sup(&self, radius: f64, samples: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..=samples {
            let r = radius * i as f64 / samples as f64;
            for k in 0..8 {
                let q = C64::from_polar(r, k as f64 * std::f64::consts::FRAC_PI_4);
                worst = worst.max(self.modulus(q));
            }
        }
        worst
    }
}
