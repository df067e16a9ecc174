use serde::{Deserialize, Serialize};

use super::LatticeKernel;
use crate::{par, Error, Result};

/// `κ = M₁`, `M = M_{n+1}` and `M_k = max_x Σ_y |H₀(x,y)| |x-y|^k` over the box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuralConstants {
    pub kappa: f64,
    pub m: f64,
    /// `moments[k-1] = M_k` for `k = 1..=order+1`.
    pub moments: Vec<f64>,
    pub order: usize,
}

impl StructuralConstants {
    pub fn moment(&self, k: usize) -> Option<f64> {
        k.checked_sub(1).and_then(|i| self.moments.get(i).copied())
    }
}

/// Row-maximal weighted sums of the kernel up to power `order + 1`.
pub fn structural_constants(kernel: &LatticeKernel, order: usize) -> Result<StructuralConstants> {
    if order == 0 {
        return Err(Error::param("order", "must be at least 1"));
    }
    let moments = moment_norms(kernel, order + 1);
    Ok(StructuralConstants {
        kappa: moments[0],
        m: moments[order],
        moments,
        order,
    })
}

/// `[M_1, ..., M_kmax]`.
pub fn moment_norms(kernel: &LatticeKernel, kmax: usize) -> Vec<f64> {
    let g = *kernel.geometry();
    let mat = kernel.matrix();
    let rows: Vec<usize> = (0..mat.dim()).collect();
    let sums = par::map(&rows, |&x| {
        let mut acc = vec![0.0; kmax];
        for (y, v) in mat.row(x) {
            let r = g.distance(x, y);
            let a = v.norm();
            let mut rk = 1.0;
            for s in acc.iter_mut() {
                rk *= r;
                *s += a * rk;
            }
        }
        acc
    });
    let mut out = vec![0.0; kmax];
    for row in sums {
        for (o, s) in out.iter_mut().zip(row) {
            *o = f64::max(*o, s);
        }
    }
    out
}

/// Schur bound `max_x Σ_y |H₀(x,y)| e^{μ|x-y|} - 1`, used for exponential tail estimates.
pub fn exponential_moment(kernel: &LatticeKernel, mu: f64) -> f64 {
    let g = *kernel.geometry();
    let mat = kernel.matrix();
    let rows: Vec<usize> = (0..mat.dim()).collect();
    par::map(&rows, |&x| {
        mat.row(x)
            .map(|(y, v)| v.norm() * (mu * g.distance(x, y)).exp_m1())
            .sum::<f64>()
    })
    .into_iter()
    .fold(0.0, f64::max)
}
