use serde::{Deserialize, Serialize};

use super::jet::{Jet, JET_LEN};
use super::BumpFunction;
use crate::quadrature::GaussLegendre;
use crate::{Error, Result};

/// Panels in the cumulative quadrature table.
pub const STEP_PANELS: usize = 512;
const PANEL_NODES: usize = 10;

/// Smoothed step `χ(x) = c ∫₀^x w²(y) dy`.
#[derive(Debug, Clone)]
pub struct SmoothedStep {
    bump: BumpFunction,
    scale: f64,
    normalized: bool,
    sup_norm: f64,
    /// `cumulative[i] = ∫₀^{iε/P} w²`.
    cumulative: Vec<f64>,
    rule: GaussLegendre,
}

/// Serializable cutoff construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutoffSpec {
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_normalize")]
    pub normalize: bool,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
}

fn default_epsilon() -> f64 {
    1.0
}
fn default_normalize() -> bool {
    true
}
fn default_n_max() -> usize {
    3
}

impl Default for CutoffSpec {
    fn default() -> Self {
        Self {
            epsilon: default_epsilon(),
            normalize: default_normalize(),
            n_max: default_n_max(),
        }
    }
}

impl CutoffSpec {
    pub fn build(&self) -> Result<SmoothedStep> {
        Ok(make_step(super::make_bump(self.epsilon, self.n_max)?, self.normalize))
    }
}

/// Builds `χ` from `w`, with `c = 1/∫w²` when `normalize` is set and `c = 1` otherwise.
pub fn make_step(bump: BumpFunction, normalize: bool) -> SmoothedStep {
    let rule = GaussLegendre::new(PANEL_NODES);
    let e = bump.epsilon();
    let h = e / STEP_PANELS as f64;
    let mut cumulative = Vec::with_capacity(STEP_PANELS + 1);
    let mut acc = 0.0;
    cumulative.push(0.0);
    for i in 0..STEP_PANELS {
        let a = i as f64 * h;
        acc += rule.integrate(a, a + h, |y| bump.value(y).powi(2));
        cumulative.push(acc);
    }
    let scale = if normalize { 1.0 / acc } else { 1.0 };
    SmoothedStep {
        bump,
        scale,
        normalized: normalize,
        sup_norm: scale * acc,
        cumulative,
        rule,
    }
}

impl SmoothedStep {
    pub fn bump(&self) -> &BumpFunction {
        &self.bump
    }

    pub fn epsilon(&self) -> f64 {
        self.bump.epsilon()
    }

    /// The constant `c`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `sup χ = χ(ε)`.
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    /// `∫₀^ε w²`.
    pub fn square_integral(&self) -> f64 {
        self.cumulative[STEP_PANELS]
    }

    pub fn value(&self, x: f64) -> f64 {
        let e = self.epsilon();
        if x <= 0.0 {
            return 0.0;
        }
        if x >= e {
            return self.sup_norm;
        }
        let h = e / STEP_PANELS as f64;
        let i = ((x / h) as usize).min(STEP_PANELS - 1);
        let a = i as f64 * h;
        let part = self.rule.integrate(a, x, |y| self.bump.value(y).powi(2));
        self.scale * (self.cumulative[i] + part)
    }

    /// Taylor jet of `χ` at `x`; coefficient `k ≥ 1` is `c·(w²)_{k-1}/k`.
    pub fn jet(&self, x: f64) -> Jet {
        let w2 = self.bump.square_jet(x);
        let mut c = [0.0; JET_LEN];
        c[0] = self.value(x);
        for k in 1..JET_LEN {
            c[k] = self.scale * w2.c[k - 1] / k as f64;
        }
        Jet { c }
    }

    /// `χ^(k)(x)` for `k ≤ n_max + 1`.
    pub fn derivative(&self, x: f64, k: usize) -> Result<f64> {
        if k == 0 {
            return Ok(self.value(x));
        }
        self.bump.check_order(k)?;
        Ok(self.scale * self.bump.square_jet(x).derivative(k - 1))
    }

    /// `√χ' = √c · w`.
    pub fn sqrt_derivative(&self, x: f64) -> f64 {
        self.scale.sqrt() * self.bump.value(x)
    }

    /// `χ(x) / sup χ`.
    pub fn normalized(&self, x: f64) -> f64 {
        self.value(x) / self.sup_norm
    }

    pub fn spec(&self) -> CutoffSpec {
        CutoffSpec {
            epsilon: self.epsilon(),
            normalize: self.normalized,
            n_max: self.bump.n_max(),
        }
    }

    /// Fails when `k` exceeds the available derivative order.
    pub fn require_order(&self, k: usize) -> Result<()> {
        if k > self.bump.n_max() + 1 {
            return Err(Error::DerivativeOrder {
                requested: k,
                available: self.bump.n_max() + 1,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutoffs::make_bump;

    fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
        fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
            (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
        }
        fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let (l, r) = (simpson(f, a, m), simpson(f, m, b));
            if depth == 0 || (l + r - whole).abs() <= 15.0 * tol {
                return l + r + (l + r - whole) / 15.0;
            }
            rec(f, a, m, l, tol / 2.0, depth - 1) + rec(f, m, b, r, tol / 2.0, depth - 1)
        }
        rec(f, a, b, simpson(f, a, b), tol, 50)
    }

    #[test]
    fn endpoints_and_normalization() {
        let chi = make_step(make_bump(1.0, 3).unwrap(), true);
        assert_eq!(chi.value(0.0), 0.0);
        assert_eq!(chi.value(-1.0), 0.0);
        assert!((chi.value(1.0) - 1.0).abs() < 1e-15);
        assert!((chi.value(5.0) - 1.0).abs() < 1e-15);
        assert!((chi.value(1.0 - 1e-12) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn square_integral_matches_adaptive_oracle() {
        for e in [1.0, 2.5] {
            let w = make_bump(e, 3).unwrap();
            let chi = make_step(w, false);
            let oracle = adaptive_simpson(&|y| w.value(y).powi(2), 0.0, e, 1e-14);
            assert!((chi.square_integral() - oracle).abs() < 1e-10);
            for &x in &[0.1 * e, 0.2 * e, 0.6 * e, 0.9 * e] {
                let o = adaptive_simpson(&|y| w.value(y).powi(2), 0.0, x, 1e-14);
                assert!((chi.value(x) - o).abs() < 1e-10, "x={x}");
            }
        }
        let chi = make_step(make_bump(1.0, 3).unwrap(), false);
        assert!((chi.square_integral() - 0.702852626386675).abs() < 1e-10);
    }

    #[test]
    fn plateau_increment_is_exact() {
        for normalize in [false, true] {
            let chi = make_step(make_bump(2.0, 3).unwrap(), normalize);
            let inc = chi.value(1.5) - chi.value(0.5);
            assert!((inc - chi.scale() * 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_is_scaled_square() {
        let chi = make_step(make_bump(1.0, 4).unwrap(), true);
        for i in 0..10_000 {
            let x = -0.05 + 1.1 * i as f64 / 9_999.0;
            let d = chi.derivative(x, 1).unwrap();
            assert!((d - chi.scale() * chi.bump().value(x).powi(2)).abs() < 1e-9);
        }
    }

    #[test]
    fn higher_derivatives_match_finite_differences() {
        let chi = make_step(make_bump(1.0, 4).unwrap(), true);
        let h = 1e-5;
        for &x in &[0.07, 0.15, 0.22, 0.8, 0.9] {
            for k in 1..=4 {
                let num = (chi.derivative(x + h, k - 1).unwrap() - chi.derivative(x - h, k - 1).unwrap()) / (2.0 * h);
                let ana = chi.derivative(x, k).unwrap();
                assert!((num - ana).abs() / ana.abs().max(1.0) < 1e-6, "x={x} k={k}");
            }
        }
    }

    #[test]
    fn monotone() {
        let chi = make_step(make_bump(1.0, 3).unwrap(), true);
        let mut prev = 0.0;
        for i in 0..=2000 {
            let v = chi.value(i as f64 / 2000.0);
            assert!(v >= prev - 1e-15);
            prev = v;
        }
    }
}
