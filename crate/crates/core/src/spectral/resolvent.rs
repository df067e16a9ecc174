use std::sync::OnceLock;

use crate::linalg;
use crate::operators::{BoxGeometry, LatticeKernel, SparseMatrix};
use crate::{Error, Result, C64};

use super::banded::BandedLu;

/// Sites up to which the spectrum is computed by dense diagonalization.
pub const SPECTRAL_DENSE_CAP: usize = 4096;

/// Smallest accepted `dist(z, σ(H))` for a resolvent solve.
pub const MIN_SPECTRAL_DISTANCE: f64 = 1e-8;

/// Largest accepted residual `‖(z - H)w - δ_x‖`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Time-independent `H = H₀ + V` with `V` diagonal.
#[derive(Debug)]
pub struct StaticHamiltonian {
    geometry: BoxGeometry,
    matrix: SparseMatrix,
    spectrum: OnceLock<Vec<f64>>,
}

impl StaticHamiltonian {
    pub fn free(kernel: &LatticeKernel) -> Self {
        Self::from_matrix(kernel.geometry().clone(), kernel.matrix().clone())
    }

    pub fn with_potential(kernel: &LatticeKernel, potential: &[f64]) -> Result<Self> {
        if potential.len() != kernel.site_count() {
            return Err(Error::param(
                "potential",
                format!("{} values for {} sites", potential.len(), kernel.site_count()),
            ));
        }
        if potential.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("potential", "values must be finite"));
        }
        let n = kernel.site_count();
        let rows = (0..n)
            .map(|i| {
                let mut row: Vec<(usize, C64)> = kernel.matrix().row(i).collect();
                if potential[i] != 0.0 {
                    row.push((i, C64::new(potential[i], 0.0)));
                }
                row
            })
            .collect();
        Ok(Self::from_matrix(kernel.geometry().clone(), SparseMatrix::from_rows(rows)))
    }

    pub fn from_matrix(geometry: BoxGeometry, matrix: SparseMatrix) -> Self {
        StaticHamiltonian {
            geometry,
            matrix,
            spectrum: OnceLock::new(),
        }
    }

    pub fn geometry(&self) -> &BoxGeometry {
        &self.geometry
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn site_count(&self) -> usize {
        self.matrix.dim()
    }

    /// Ascending eigenvalues by dense diagonalization, cached.
    pub fn spectrum(&self) -> Result<&[f64]> {
        if self.site_count() > SPECTRAL_DENSE_CAP {
            return Err(Error::param(
                "H",
                format!("{} sites exceed the dense spectrum cap {SPECTRAL_DENSE_CAP}", self.site_count()),
            ));
        }
        Ok(self
            .spectrum
            .get_or_init(|| linalg::hermitian_eigen(&self.matrix.to_dense()).0))
    }

    /// `‖H‖`.
    pub fn norm(&self) -> Result<f64> {
        if self.site_count() <= SPECTRAL_DENSE_CAP {
            let s = self.spectrum()?;
            return Ok(s.first().map_or(0.0, |lo| lo.abs().max(s[s.len() - 1].abs())));
        }
        self.matrix.hermitian_norm()
    }

    /// `dist(z, σ(H))`; above the dense cap, the distance to the convex
    /// hull of the spectrum, which never exceeds the true distance.
    pub fn spectral_distance(&self, z: C64) -> Result<f64> {
        if self.site_count() <= SPECTRAL_DENSE_CAP {
            return Ok(self
                .spectrum()?
                .iter()
                .map(|&l| (z - l).norm())
                .fold(f64::INFINITY, f64::min));
        }
        let (lo, hi) = self.matrix.hermitian_extremes()?;
        let dx = if z.re < lo {
            lo - z.re
        } else if z.re > hi {
            z.re - hi
        } else {
            0.0
        };
        Ok(dx.hypot(z.im))
    }

    fn check_site(&self, name: &'static str, site: usize) -> Result<()> {
        if site >= self.site_count() {
            return Err(Error::param(name, format!("site {site} outside box of {} sites", self.site_count())));
        }
        Ok(())
    }
}

/// `w = R(z)δ_x` with `R(z) = (z - H)^{-1}`, after certifying `z` off the spectrum.
pub fn resolvent_column(h: &StaticHamiltonian, z: C64, x: usize) -> Result<Vec<C64>> {
    h.check_site("x", x)?;
    let distance = h.spectral_distance(z)?;
    if distance < MIN_SPECTRAL_DISTANCE {
        return Err(Error::NearSpectrum { distance });
    }
    solve_column(h, z, x)
}

/// `⟨R(z)δ_x, δ_y⟩ = w(y)`.
pub fn resolvent_element(h: &StaticHamiltonian, z: C64, x: usize, y: usize) -> Result<C64> {
    h.check_site("y", y)?;
    Ok(resolvent_column(h, z, x)?[y])
}

/// Uncertified solve with one step of iterative refinement and a residual check.
pub(crate) fn solve_column(h: &StaticHamiltonian, z: C64, x: usize) -> Result<Vec<C64>> {
    let lu = BandedLu::shifted(h.matrix(), z)?;
    let n = h.site_count();
    let mut w = vec![C64::new(0.0, 0.0); n];
    w[x] = C64::new(1.0, 0.0);
    lu.solve_in_place(&mut w);
    let mut r = residual(h, z, x, &w);
    if linalg::norm(&r) > RESIDUAL_TOLERANCE * 1e-3 {
        lu.solve_in_place(&mut r);
        for (wi, ri) in w.iter_mut().zip(&r) {
            *wi += ri;
        }
        r = residual(h, z, x, &w);
    }
    let res = linalg::norm(&r);
    if res > RESIDUAL_TOLERANCE {
        return Err(Error::NonConvergence {
            what: "resolvent solve",
            residual: res,
        });
    }
    Ok(w)
}

/// `δ_x - (z - H)w`.
fn residual(h: &StaticHamiltonian, z: C64, x: usize, w: &[C64]) -> Vec<C64> {
    let mut hw = vec![C64::new(0.0, 0.0); w.len()];
    h.matrix().apply(w, &mut hw);
    let mut r: Vec<C64> = w.iter().zip(&hw).map(|(wi, hi)| hi - z * wi).collect();
    r[x] += C64::new(1.0, 0.0);
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{build_exponential_kernel, build_laplacian, KernelFamily, KernelSpec};
    use nalgebra::DMatrix;

    fn zero_kernel(l: usize) -> LatticeKernel {
        KernelSpec {
            geometry: BoxGeometry::cube(1, l).unwrap(),
            family: KernelFamily::PowerLaw {
                exponent: 2.0,
                coupling: 0.0,
            },
            floor: 1e-14,
        }
        .build()
        .unwrap()
    }

    #[test]
    fn zero_hamiltonian_at_i() {
        let h = StaticHamiltonian::free(&zero_kernel(4));
        let z = C64::new(0.0, 1.0);
        for x in 0..9 {
            for y in 0..9 {
                let v = resolvent_element(&h, z, x, y).unwrap();
                let want = if x == y { C64::new(0.0, -1.0) } else { C64::new(0.0, 0.0) };
                assert!((v - want).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn constant_hamiltonian_shifted_by_one() {
        let k = zero_kernel(3);
        let c = 2.5;
        let h = StaticHamiltonian::with_potential(&k, &vec![c; 7]).unwrap();
        let z = C64::new(c + 1.0, 0.0);
        for x in 0..7 {
            for y in 0..7 {
                let v = resolvent_element(&h, z, x, y).unwrap();
                assert!((v - if x == y { 1.0 } else { 0.0 }).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn laplacian_matches_dense_inverse() {
        let k = build_laplacian(BoxGeometry::cube(1, 64).unwrap());
        let h = StaticHamiltonian::free(&k);
        let z = C64::new(0.0, 3.0);
        let n = k.site_count();
        let dense = (DMatrix::<C64>::identity(n, n) * z - k.matrix().to_dense())
            .try_inverse()
            .unwrap();
        for x in [0, 40, 64, 128] {
            let w = resolvent_column(&h, z, x).unwrap();
            for y in 0..n {
                assert!((w[y] - dense[(y, x)]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn real_z_inside_spectrum_is_rejected() {
        let k = build_laplacian(BoxGeometry::cube(1, 2).unwrap());
        let h = StaticHamiltonian::free(&k);
        // eigenvalues of the 5-site path include 0
        assert!(matches!(
            resolvent_element(&h, C64::new(0.0, 0.0), 0, 0),
            Err(Error::NearSpectrum { .. })
        ));
    }

    #[test]
    fn resolvent_identity_on_sampled_pairs() {
        let k = build_exponential_kernel(BoxGeometry::cube(1, 20).unwrap(), 1.0, 1.0).unwrap();
        let h = StaticHamiltonian::free(&k);
        let x = 20;
        let pairs = [
            (C64::new(0.3, 0.9), C64::new(-1.0, 0.5)),
            (C64::new(4.0, 0.0), C64::new(0.0, -2.0)),
            (C64::new(-0.2, 1.5), C64::new(0.1, 1.2)),
        ];
        for (z, zp) in pairs {
            let rz = resolvent_column(&h, z, x).unwrap();
            let rzp = resolvent_column(&h, zp, x).unwrap();
            // R(z)R(z')δ_x = R(z) applied to rzp
            let lu = BandedLu::shifted(h.matrix(), z).unwrap();
            let mut prod = rzp.clone();
            lu.solve_in_place(&mut prod);
            for y in 0..h.site_count() {
                let lhs = rz[y] - rzp[y];
                let rhs = (zp - z) * prod[y];
                assert!((lhs - rhs).norm() < 1e-9);
            }
        }
    }
}
