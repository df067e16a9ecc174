//! Small dense and matrix-free linear algebra used for norms and oracles.

use nalgebra::DMatrix;

use crate::{Error, Result, C64};

/// Sites up to which operator norms are computed by dense decomposition.
pub const DENSE_NORM_CAP: usize = 1024;

/// Eigenvalues and eigenvectors of a Hermitian matrix, ascending.
pub fn hermitian_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let eig = m.clone().symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Largest singular value of a dense matrix.
pub fn dense_spectral_norm(m: &DMatrix<C64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .fold(0.0f64, |a, &b| a.max(b))
}

/// Bracket on an extreme eigenvalue produced by Lanczos.
#[derive(Debug, Clone, Copy)]
pub struct RitzBound {
    /// Ritz value; a lower bound for the largest eigenvalue.
    pub value: f64,
    /// Residual norm of the Ritz pair; the largest eigenvalue lies in
    /// `[value, value + residual]`.
    pub residual: f64,
}

/// Largest eigenvalue of a Hermitian operator given as a matvec closure,
/// via Lanczos with full reorthogonalization.
///
/// `apply(x, y)` must write `A x` into `y`. Iterates until the Ritz residual
/// drops below `rel_tol * |value|` or `max_iter` Krylov vectors are built.
pub fn lanczos_max<F>(n: usize, apply: F, rel_tol: f64, max_iter: usize) -> Result<RitzBound>
where
    F: Fn(&[C64], &mut [C64]),
{
    if n == 0 {
        return Ok(RitzBound {
            value: 0.0,
            residual: 0.0,
        });
    }
    let m_max = max_iter.min(n).max(1);
    // Deterministic start vector with broad overlap.
    let mut q: Vec<C64> = (0..n)
        .map(|i| C64::new(1.0 + 0.5 * ((i as f64) * 0.618_033_988_75).fract(), 0.0))
        .collect();
    normalize(&mut q);
    let mut basis: Vec<Vec<C64>> = vec![q];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![C64::new(0.0, 0.0); n];
    let mut best = RitzBound {
        value: 0.0,
        residual: f64::INFINITY,
    };
    for j in 0..m_max {
        apply(&basis[j], &mut w);
        let alpha = dot(&basis[j], &w).re;
        alphas.push(alpha);
        // full reorthogonalization, twice
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let beta = norm(&w);
        let (theta, last_comp) = tridiagonal_top(&alphas, &betas);
        let residual = beta * last_comp.abs();
        best = RitzBound {
            value: theta,
            residual,
        };
        if residual <= rel_tol * theta.abs().max(f64::MIN_POSITIVE) || beta < 1e-300 {
            return Ok(best);
        }
        if j + 1 == m_max {
            break;
        }
        betas.push(beta);
        let next: Vec<C64> = w.iter().map(|x| x / beta).collect();
        basis.push(next);
    }
    if basis.len() == n {
        // Krylov space exhausted: Ritz values are exact.
        return Ok(RitzBound {
            value: best.value,
            residual: 0.0,
        });
    }
    Err(Error::NonConvergence {
        what: "Lanczos extreme eigenvalue",
        residual: best.residual,
    })
}

fn tridiagonal_top(alphas: &[f64], betas: &[f64]) -> (f64, f64) {
    let m = alphas.len();
    let t = DMatrix::<f64>::from_fn(m, m, |r, c| {
        if r == c {
            alphas[r]
        } else if r + 1 == c {
            betas[r]
        } else if c + 1 == r {
            betas[c]
        } else {
            0.0
        }
    });
    let eig = t.symmetric_eigen();
    let (imax, &vmax) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty tridiagonal");
    (vmax, eig.eigenvectors[(m - 1, imax)])
}

pub(crate) fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(a: &mut [C64]) {
    let n = norm(a);
    for x in a.iter_mut() {
        *x /= n;
    }
}
