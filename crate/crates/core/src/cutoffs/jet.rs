use std::ops::{Add, Div, Mul, Neg, Sub};

/// Number of Taylor coefficients carried; derivatives up to order `JET_LEN - 1`.
pub const JET_LEN: usize = 9;

/// Truncated Taylor expansion `Σ c[k] h^k` about a point; `c[k] = f^(k)/k!`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub c: [f64; JET_LEN],
}

impl Jet {
    pub const fn zero() -> Self {
        Self { c: [0.0; JET_LEN] }
    }

    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; JET_LEN];
        c[0] = v;
        Self { c }
    }

    /// The identity map expanded about `x`.
    pub fn variable(x: f64) -> Self {
        let mut c = [0.0; JET_LEN];
        c[0] = x;
        c[1] = 1.0;
        Self { c }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// `f^(k)` at the expansion point.
    pub fn derivative(&self, k: usize) -> f64 {
        self.c[k] * factorial(k)
    }

    /// Jet of `h ↦ f(a h)` given the jet of `f`: coefficient `k` gains `a^k`.
    pub fn rescale(mut self, a: f64) -> Self {
        let mut p = 1.0;
        for c in self.c.iter_mut() {
            *c *= p;
            p *= a;
        }
        self
    }

    pub fn scale(mut self, s: f64) -> Self {
        for c in self.c.iter_mut() {
            *c *= s;
        }
        self
    }

    pub fn recip(&self) -> Self {
        let mut r = [0.0; JET_LEN];
        let a0 = self.c[0];
        r[0] = 1.0 / a0;
        for k in 1..JET_LEN {
            let s: f64 = (1..=k).map(|j| self.c[j] * r[k - j]).sum();
            r[k] = -s / a0;
        }
        Self { c: r }
    }

    pub fn exp(&self) -> Self {
        // e' = a' e  ⇒  k e_k = Σ_{j=1..k} j a_j e_{k-j}
        let mut e = [0.0; JET_LEN];
        e[0] = self.c[0].exp();
        for k in 1..JET_LEN {
            let s: f64 = (1..=k).map(|j| j as f64 * self.c[j] * e[k - j]).sum();
            e[k] = s / k as f64;
        }
        Self { c: e }
    }
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, o: Jet) -> Jet {
        for (a, b) in self.c.iter_mut().zip(o.c) {
            *a += b;
        }
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(mut self, o: Jet) -> Jet {
        for (a, b) in self.c.iter_mut().zip(o.c) {
            *a -= b;
        }
        self
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut r = [0.0; JET_LEN];
        for (k, rk) in r.iter_mut().enumerate() {
            *rk = (0..=k).map(|j| self.c[j] * o.c[k - j]).sum();
        }
        Jet { c: r }
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_variable() {
        let j = Jet::variable(0.3).exp();
        for k in 0..JET_LEN {
            assert!((j.derivative(k) - 0.3f64.exp()).abs() < 1e-13);
        }
    }

    #[test]
    fn reciprocal_derivatives() {
        // d^k/dx^k 1/x = (-1)^k k! / x^{k+1}
        let x = 0.7;
        let j = Jet::variable(x).recip();
        for k in 0..JET_LEN {
            let exact = (-1f64).powi(k as i32) * factorial(k) / x.powi(k as i32 + 1);
            assert!(((j.derivative(k) - exact) / exact).abs() < 1e-12);
        }
    }

    #[test]
    fn product_and_quotient() {
        let x = Jet::variable(1.5);
        let p = x * x * x;
        assert!((p.derivative(1) - 3.0 * 2.25).abs() < 1e-12);
        assert!((p.derivative(3) - 6.0).abs() < 1e-12);
        let q = p / x;
        assert!((q.derivative(2) - 2.0).abs() < 1e-12);
    }
}
