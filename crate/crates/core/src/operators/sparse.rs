use nalgebra::DMatrix;

use crate::linalg::{self, DENSE_NORM_CAP};
use crate::{par, Result, C64};

/// Square complex matrix in compressed sparse row form.
///
/// Column indices are sorted within each row. Operators derived from a kernel
/// (commutators, residuals) keep the kernel's pattern so they can be combined
/// entry by entry.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            row_ptr: vec![0; n + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    /// Builds from per-row `(col, value)` lists; duplicate columns are summed.
    pub fn from_rows(rows: Vec<Vec<(usize, C64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                assert!(c < n, "column {c} out of range {n}");
                if last == Some(c) {
                    *vals.last_mut().expect("previous entry") += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                    last = Some(c);
                }
            }
            row_ptr.push(cols.len());
        }
        Self {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `(col, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    /// All stored `(row, col, value)` triples.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    /// Same pattern, values `f(row, col, value)`.
    pub fn map_entries<F: Fn(usize, usize, C64) -> C64>(&self, f: F) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                out.vals[k] = f(i, self.cols[k], self.vals[k]);
            }
        }
        out
    }

    /// `self + other`; both must share this pattern.
    pub fn add_same_pattern(&self, other: &Self, scale: C64) -> Self {
        assert!(
            self.row_ptr == other.row_ptr && self.cols == other.cols,
            "operands must share a sparsity pattern"
        );
        let mut out = self.clone();
        for (a, b) in out.vals.iter_mut().zip(&other.vals) {
            *a += scale * b;
        }
        out
    }

    /// `diag(d) · self`.
    pub fn scale_rows(&self, d: &[f64]) -> Self {
        self.map_entries(|i, _, v| v * d[i])
    }

    /// `self · diag(d)`.
    pub fn scale_cols(&self, d: &[f64]) -> Self {
        self.map_entries(|_, j, v| v * d[j])
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map_entries(|_, _, v| v * s)
    }

    pub fn adjoint(&self) -> Self {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); self.n];
        for (i, j, v) in self.entries() {
            rows[j].push((i, v.conj()));
        }
        Self::from_rows(rows)
    }

    /// `max |A_ij - conj(A_ji)|` over stored entries.
    pub fn hermitian_residue(&self) -> f64 {
        self.entries()
            .map(|(i, j, v)| (v - self.get(j, i).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// `y = A x`, rows in parallel for large matrices.
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.n);
        par::fill(y, |i| self.row_dot(i, x));
    }

    /// Single-threaded `y = A x`.
    pub fn apply_seq(&self, x: &[C64], y: &mut [C64]) {
        par::fill_seq(y, |i| self.row_dot(i, x));
    }

    #[inline]
    fn row_dot(&self, i: usize, x: &[C64]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for k in self.row_ptr[i]..self.row_ptr[i + 1] {
            acc += self.vals[k] * x[self.cols[k]];
        }
        acc
    }

    /// `y = A* x`.
    pub fn apply_adjoint(&self, x: &[C64], y: &mut [C64]) {
        y.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                y[self.cols[k]] += self.vals[k].conj() * x[i];
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::<C64>::zeros(self.n, self.n);
        for (i, j, v) in self.entries() {
            m[(i, j)] += v;
        }
        m
    }

    /// Largest absolute row sum `max_x Σ_y |A(x,y)|`.
    pub fn max_row_sum(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Spectral norm `‖A‖`.
    ///
    /// Dense SVD up to [`DENSE_NORM_CAP`] sites; above it, Lanczos on `A*A`
    /// with a certified residual (relative 1e-12 on `‖A‖²`).
    pub fn operator_norm(&self) -> Result<f64> {
        if self.nnz() == 0 {
            return Ok(0.0);
        }
        if self.n <= DENSE_NORM_CAP {
            return Ok(linalg::dense_spectral_norm(&self.to_dense()));
        }
        let top = linalg::lanczos_max(
            self.n,
            |x, y| {
                let mut t = vec![C64::new(0.0, 0.0); self.n];
                self.apply(x, &mut t);
                self.apply_adjoint(&t, y);
            },
            1e-12,
            400,
        )?;
        Ok(top.value.max(0.0).sqrt())
    }

    /// Norm of a Hermitian matrix via its extreme eigenvalues.
    pub fn hermitian_norm(&self) -> Result<f64> {
        let (lo, hi) = self.hermitian_extremes()?;
        Ok(lo.abs().max(hi.abs()))
    }

    /// `(λ_min, λ_max)` of a Hermitian matrix.
    pub fn hermitian_extremes(&self) -> Result<(f64, f64)> {
        if self.nnz() == 0 {
            return Ok((0.0, 0.0));
        }
        if self.n <= DENSE_NORM_CAP {
            let (vals, _) = linalg::hermitian_eigen(&self.to_dense());
            return Ok((vals[0], vals[vals.len() - 1]));
        }
        let hi = linalg::lanczos_max(self.n, |x, y| self.apply(x, y), 1e-12, 400)?;
        let lo = linalg::lanczos_max(
            self.n,
            |x, y| {
                self.apply(x, y);
                y.iter_mut().for_each(|v| *v = -*v);
            },
            1e-12,
            400,
        )?;
        Ok((-lo.value, hi.value))
    }
}
