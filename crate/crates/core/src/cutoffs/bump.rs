use serde::{Deserialize, Serialize};

use super::jet::{Jet, JET_LEN};
use crate::{Error, Result};

/// Below this argument `exp(-1/s)` and all its derivatives are under 1e-200.
const SEAM_GUARD: f64 = 0.002;

/// Smooth bump `w ∈ C_c^∞((0, ε))`, equal to 1 on `[ε/4, 3ε/4]`, with values in `[0, 1]`.
///
/// Built from the transition `g(s) = f(s) / (f(s) + f(1-s))`, `f(s) = exp(-1/s)`:
/// `w(y) = g(4y/ε)` on the rising edge and `g(4(ε-y)/ε)` on the falling edge.
/// Derivatives come from truncated Taylor arithmetic and are exact to rounding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpFunction {
    epsilon: f64,
    n_max: usize,
}

/// Builds the bump with derivatives available up to order `n_max`.
pub fn make_bump(epsilon: f64, n_max: usize) -> Result<BumpFunction> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::param("epsilon", format!("must be positive, got {epsilon}")));
    }
    if n_max < 2 {
        return Err(Error::param("n_max", "must be at least 2"));
    }
    if n_max + 1 >= JET_LEN {
        return Err(Error::DerivativeOrder {
            requested: n_max + 1,
            available: JET_LEN - 1,
        });
    }
    Ok(BumpFunction { epsilon, n_max })
}

fn f_jet(s: Jet) -> Jet {
    if s.value() <= SEAM_GUARD {
        Jet::zero()
    } else {
        (-s.recip()).exp()
    }
}

/// Jet of `g` at `s`.
pub(crate) fn transition_jet(s: f64) -> Jet {
    if s <= 0.0 {
        return Jet::zero();
    }
    if s >= 1.0 {
        return Jet::constant(1.0);
    }
    let x = Jet::variable(s);
    let a = f_jet(x);
    let b = f_jet(Jet::constant(1.0) - x);
    a / (a + b)
}

impl BumpFunction {
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Taylor jet of `w` at `y`, carrying `JET_LEN` coefficients.
    pub fn jet(&self, y: f64) -> Jet {
        let e = self.epsilon;
        let q = 4.0 / e;
        if y <= 0.0 || y >= e {
            Jet::zero()
        } else if y < 0.25 * e {
            transition_jet(q * y).rescale(q)
        } else if y <= 0.75 * e {
            Jet::constant(1.0)
        } else {
            transition_jet(q * (e - y)).rescale(-q)
        }
    }

    pub fn value(&self, y: f64) -> f64 {
        self.jet(y).value()
    }

    /// `w^(k)(y)` for `k ≤ n_max + 1`.
    pub fn derivative(&self, y: f64, k: usize) -> Result<f64> {
        self.check_order(k)?;
        Ok(self.jet(y).derivative(k))
    }

    /// Jet of `w²` at `y`.
    pub fn square_jet(&self, y: f64) -> Jet {
        let j = self.jet(y);
        j * j
    }

    pub(crate) fn check_order(&self, k: usize) -> Result<()> {
        if k > self.n_max + 1 {
            return Err(Error::DerivativeOrder {
                requested: k,
                available: self.n_max + 1,
            });
        }
        Ok(())
    }
}
