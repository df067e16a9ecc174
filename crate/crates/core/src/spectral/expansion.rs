use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::cutoffs::SmoothedStep;
use crate::linalg::{self, DENSE_NORM_CAP};
use crate::operators::{DistanceField, LatticeKernel, SparseMatrix};
use crate::{Error, Result, C64};

/// Relative Lanczos residual for norms of large supports.
const LANCZOS_TOL: f64 = 1e-9;
const LANCZOS_ITER: usize = 3000;

/// Shift placing the window `[shift, shift + σε]` in the middle of `[0, φ_max]`.
pub fn window_shift(phi_max: f64, sigma: f64, epsilon: f64) -> f64 {
    0.5 * phi_max - 0.5 * sigma * epsilon
}

fn check_inputs(h0: &LatticeKernel, phi: &DistanceField, sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::param("sigma", "must be positive"));
    }
    if phi.values().len() != h0.site_count() {
        return Err(Error::param("phi", "field and kernel live on different boxes"));
    }
    Ok(())
}

/// Remainder operator `i[H₀, A(χ)] - Σ_{k=1}^n σ^{-k}/k!·A(χ^(k))·B_k`
/// with `A(f) = f((φ - shift)/σ)` and `B_k = i·ad^k_φ(H₀)`.
///
/// Entry `(x, y)` equals `i·H₀(x,y)·[χ(a_y) - Σ_{k≤n} χ^(k)(a_x) h^k/k!]`
/// with `h = (φ(y) - φ(x))/σ`.
pub fn expansion_remainder(
    h0: &LatticeKernel,
    chi: &SmoothedStep,
    phi: &DistanceField,
    sigma: f64,
    n: usize,
    shift: f64,
) -> Result<SparseMatrix> {
    check_inputs(h0, phi, sigma)?;
    if n == 0 {
        return Err(Error::param("n", "expansion order must be at least 1"));
    }
    chi.require_order(n)?;
    let args: Vec<f64> = phi.values().iter().map(|p| (p - shift) / sigma).collect();
    let taylor: Vec<Vec<f64>> = args.iter().map(|&a| chi.jet(a).c[..=n].to_vec()).collect();
    let phi = phi.values();
    Ok(h0.matrix().map_entries(|x, y, hxy| {
        let h = (phi[y] - phi[x]) / sigma;
        let poly = taylor[x].iter().rev().fold(0.0, |acc, c| acc * h + c);
        let d = taylor[y][0] - poly;
        C64::new(0.0, d) * hxy
    }))
}

/// `‖expansion_remainder(..)‖`.
pub fn expansion_residual(
    h0: &LatticeKernel,
    chi: &SmoothedStep,
    phi: &DistanceField,
    sigma: f64,
    n: usize,
    shift: f64,
) -> Result<f64> {
    support_norm(&expansion_remainder(h0, chi, phi, sigma, n, shift)?)
}

/// Leading-term gap `i[H₀, A(χ)] - σ^{-1}·A(√χ')·i[H₀, φ]·A(√χ')`.
///
/// Hermitian; entry `(x, y)` is `i·H₀(x,y)·[χ(a_y) - χ(a_x) - h·√χ'(a_x)√χ'(a_y)]`.
pub fn leading_gap_operator(
    h0: &LatticeKernel,
    chi: &SmoothedStep,
    phi: &DistanceField,
    sigma: f64,
    shift: f64,
) -> Result<SparseMatrix> {
    check_inputs(h0, phi, sigma)?;
    let args: Vec<f64> = phi.values().iter().map(|p| (p - shift) / sigma).collect();
    let values: Vec<f64> = args.iter().map(|&a| chi.value(a)).collect();
    let roots: Vec<f64> = args.iter().map(|&a| chi.sqrt_derivative(a)).collect();
    let phi = phi.values();
    Ok(h0.matrix().map_entries(|x, y, hxy| {
        let h = (phi[y] - phi[x]) / sigma;
        let d = values[y] - values[x] - h * roots[x] * roots[y];
        C64::new(0.0, d) * hxy
    }))
}

/// Norm and top eigenvalue of the leading-term gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub sigma: f64,
    pub norm: f64,
    pub max_eigenvalue: f64,
}

pub fn symmetrized_leading_gap(
    h0: &LatticeKernel,
    chi: &SmoothedStep,
    phi: &DistanceField,
    sigma: f64,
    shift: f64,
) -> Result<GapReport> {
    let gap = leading_gap_operator(h0, chi, phi, sigma, shift)?;
    let (lo, hi) = support_extremes(&gap)?;
    Ok(GapReport {
        sigma,
        norm: lo.abs().max(hi.abs()),
        max_eigenvalue: hi,
    })
}

/// Rows and columns holding a nonzero entry.
fn support(m: &SparseMatrix) -> (Vec<usize>, Vec<usize>) {
    let n = m.dim();
    let mut rows = vec![false; n];
    let mut cols = vec![false; n];
    for (i, j, v) in m.entries() {
        if v != C64::new(0.0, 0.0) {
            rows[i] = true;
            cols[j] = true;
        }
    }
    let pick = |f: Vec<bool>| f.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect();
    (pick(rows), pick(cols))
}

fn compress(m: &SparseMatrix, rows: &[usize], cols: &[usize]) -> SparseMatrix {
    let mut col_pos = vec![usize::MAX; m.dim()];
    for (k, &c) in cols.iter().enumerate() {
        col_pos[c] = k;
    }
    let size = rows.len().max(cols.len());
    let mut out: Vec<Vec<(usize, C64)>> = rows
        .iter()
        .map(|&r| {
            m.row(r)
                .filter(|&(c, v)| v != C64::new(0.0, 0.0) && col_pos[c] != usize::MAX)
                .map(|(c, v)| (col_pos[c], v))
                .collect()
        })
        .collect();
    out.resize(size, Vec::new());
    SparseMatrix::from_rows(out)
}

/// `‖m‖` computed on the submatrix spanned by its nonzero rows and columns.
pub fn support_norm(m: &SparseMatrix) -> Result<f64> {
    let (rows, cols) = support(m);
    if rows.is_empty() {
        return Ok(0.0);
    }
    if rows.len().max(cols.len()) <= DENSE_NORM_CAP {
        let mut col_pos = vec![usize::MAX; m.dim()];
        for (k, &c) in cols.iter().enumerate() {
            col_pos[c] = k;
        }
        let mut d = DMatrix::<C64>::zeros(rows.len(), cols.len());
        for (k, &r) in rows.iter().enumerate() {
            for (c, v) in m.row(r) {
                if col_pos[c] != usize::MAX {
                    d[(k, col_pos[c])] += v;
                }
            }
        }
        return Ok(linalg::dense_spectral_norm(&d));
    }
    let s = compress(m, &rows, &cols);
    let n = s.dim();
    let top = linalg::lanczos_max(
        n,
        |x, y| {
            let mut t = vec![C64::new(0.0, 0.0); n];
            s.apply(x, &mut t);
            s.apply_adjoint(&t, y);
        },
        LANCZOS_TOL,
        LANCZOS_ITER,
    )?;
    Ok(top.value.max(0.0).sqrt())
}

/// `(λ_min, λ_max)` of a Hermitian matrix, computed on its support.
///
/// Sites outside the support contribute zero eigenvalues when the support
/// does not cover the whole box.
pub fn support_extremes(m: &SparseMatrix) -> Result<(f64, f64)> {
    let (rows, cols) = support(m);
    let mut sites = rows;
    sites.extend(cols);
    sites.sort_unstable();
    sites.dedup();
    if sites.is_empty() {
        return Ok((0.0, 0.0));
    }
    let s = compress(m, &sites, &sites);
    let (mut lo, mut hi) = if s.dim() <= DENSE_NORM_CAP {
        let (vals, _) = linalg::hermitian_eigen(&s.to_dense());
        (vals[0], vals[vals.len() - 1])
    } else {
        let hi = linalg::lanczos_max(s.dim(), |x, y| s.apply(x, y), LANCZOS_TOL, LANCZOS_ITER)?;
        let lo = linalg::lanczos_max(
            s.dim(),
            |x, y| {
                s.apply(x, y);
                y.iter_mut().for_each(|v| *v = -*v);
            },
            LANCZOS_TOL,
            LANCZOS_ITER,
        )?;
        (-lo.value, hi.value)
    };
    if sites.len() < m.dim() {
        lo = lo.min(0.0);
        hi = hi.max(0.0);
    }
    Ok((lo, hi))
}
