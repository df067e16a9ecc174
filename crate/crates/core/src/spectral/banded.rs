use crate::{Error, Result, C64};

use crate::operators::SparseMatrix;

/// LU factorization of a banded complex matrix with partial pivoting.
///
/// Row `i` is stored as the column window `[i - p, i + 2p]`, wide enough for
/// the fill created by row swaps within the band.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    p: usize,
    width: usize,
    rows: Vec<C64>,
    pivots: Vec<usize>,
    mults: Vec<C64>,
}

/// Half-bandwidth `max |i - j|` over stored entries.
pub fn bandwidth(m: &SparseMatrix) -> usize {
    m.entries().map(|(i, j, _)| i.abs_diff(j)).max().unwrap_or(0)
}

impl BandedLu {
    /// Factors `shift·I - m`.
    pub fn shifted(m: &SparseMatrix, shift: C64) -> Result<Self> {
        let n = m.dim();
        let p = bandwidth(m);
        let width = 3 * p + 1;
        let mut lu = BandedLu {
            n,
            p,
            width,
            rows: vec![C64::new(0.0, 0.0); n * width],
            pivots: vec![0; n],
            mults: vec![C64::new(0.0, 0.0); n * p],
        };
        for (i, j, v) in m.entries() {
            *lu.at(i, j) -= v;
        }
        for i in 0..n {
            *lu.at(i, i) += shift;
        }
        lu.factor()?;
        Ok(lu)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn half_bandwidth(&self) -> usize {
        self.p
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.p >= i && j <= i + 2 * self.p);
        i * self.width + (j + self.p - i)
    }

    fn at(&mut self, i: usize, j: usize) -> &mut C64 {
        let k = self.idx(i, j);
        &mut self.rows[k]
    }

    fn get(&self, i: usize, j: usize) -> C64 {
        self.rows[self.idx(i, j)]
    }

    fn factor(&mut self) -> Result<()> {
        let (n, p) = (self.n, self.p);
        for k in 0..n {
            let last = (k + p).min(n - 1);
            let right = (k + 2 * p).min(n - 1);
            let mut piv = k;
            let mut best = self.get(k, k).norm();
            for i in k + 1..=last {
                let a = self.get(i, k).norm();
                if a > best {
                    best = a;
                    piv = i;
                }
            }
            if best == 0.0 {
                return Err(Error::NearSpectrum { distance: 0.0 });
            }
            if piv != k {
                for j in k..=right {
                    let (a, b) = (self.idx(k, j), self.idx(piv, j));
                    self.rows.swap(a, b);
                }
            }
            self.pivots[k] = piv;
            let pivot = self.get(k, k);
            for i in k + 1..=last {
                let m = self.get(i, k) / pivot;
                self.mults[k * p + (i - k - 1)] = m;
                *self.at(i, k) = C64::new(0.0, 0.0);
                if m == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in k + 1..=right {
                    let u = self.get(k, j);
                    *self.at(i, j) -= m * u;
                }
            }
        }
        Ok(())
    }

    /// Solves `(shift·I - m) x = b` in place.
    pub fn solve_in_place(&self, b: &mut [C64]) {
        let (n, p) = (self.n, self.p);
        assert_eq!(b.len(), n, "right-hand side length");
        for k in 0..n {
            b.swap(k, self.pivots[k]);
            let bk = b[k];
            for i in k + 1..=(k + p).min(n - 1) {
                b[i] -= self.mults[k * p + (i - k - 1)] * bk;
            }
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in i + 1..=(i + 2 * p).min(n - 1) {
                s -= self.get(i, j) * b[j];
            }
            b[i] = s / self.get(i, i);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    fn random_banded(n: usize, p: usize, seed: u64) -> SparseMatrix {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let rows = (0..n)
            .map(|i| {
                (i.saturating_sub(p)..(i + p + 1).min(n))
                    .map(|j| (j, C64::new(next(), next())))
                    .collect()
            })
            .collect();
        SparseMatrix::from_rows(rows)
    }

    #[test]
    fn matches_dense_solve() {
        for (n, p) in [(1, 0), (7, 0), (12, 1), (20, 3), (9, 8)] {
            let m = random_banded(n, p, 11 + n as u64);
            let z = C64::new(0.3, 0.7);
            let lu = BandedLu::shifted(&m, z).unwrap();
            let mut b: Vec<C64> = (0..n).map(|i| C64::new(i as f64 + 1.0, -(i as f64))).collect();
            let dense = DMatrix::<C64>::identity(n, n) * z - m.to_dense();
            let oracle = dense.lu().solve(&DVector::from_vec(b.clone())).unwrap();
            lu.solve_in_place(&mut b);
            for i in 0..n {
                assert!((b[i] - oracle[i]).norm() < 1e-10, "n={n} p={p} i={i}");
            }
        }
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        // shift·I - m has a zero (0,0) entry and needs a row swap.
        let m = SparseMatrix::from_rows(vec![
            vec![(0, C64::new(1.0, 0.0)), (1, C64::new(2.0, 0.0))],
            vec![(0, C64::new(3.0, 0.0)), (1, C64::new(0.5, 0.0))],
        ]);
        let lu = BandedLu::shifted(&m, C64::new(1.0, 0.0)).unwrap();
        let mut b = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        lu.solve_in_place(&mut b);
        // [[0,-2],[-3,0.5]] x = [1,0]
        assert!((b[1] - C64::new(-0.5, 0.0)).norm() < 1e-14);
        assert!((b[0] - C64::new(-1.0 / 12.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn singular_is_reported() {
        let m = SparseMatrix::from_rows(vec![vec![(0, C64::new(2.0, 0.0))]]);
        assert!(matches!(
            BandedLu::shifted(&m, C64::new(2.0, 0.0)),
            Err(Error::NearSpectrum { .. })
        ));
    }
}
