use serde::{Deserialize, Serialize};

use super::{BoxGeometry, SparseMatrix};
use crate::{par, Error, Result, C64};

/// Entries with modulus below this are dropped at construction.
pub const DEFAULT_FLOOR: f64 = 1e-14;

fn default_floor() -> f64 {
    DEFAULT_FLOOR
}

/// Named kernel families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelFamily {
    /// Nearest-neighbour adjacency, `[Δu](x) = Σ_{y~x} u(y)`.
    Laplacian,
    /// `J |x-y|^{-p}` off the diagonal.
    PowerLaw { exponent: f64, coupling: f64 },
    /// `B exp(-m |x-y|)` off the diagonal.
    Exponential { rate: f64, prefactor: f64 },
    /// Built programmatically from explicit entries.
    Custom { label: String },
}

/// Serializable description from which a kernel is rebuilt exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub geometry: BoxGeometry,
    #[serde(flatten)]
    pub family: KernelFamily,
    #[serde(default = "default_floor")]
    pub floor: f64,
}

impl KernelSpec {
    pub fn build(&self) -> Result<LatticeKernel> {
        match &self.family {
            KernelFamily::Laplacian => Ok(build_laplacian(self.geometry)),
            KernelFamily::PowerLaw { exponent, coupling } => {
                build_powerlaw_with_floor(self.geometry, *exponent, *coupling, self.floor)
            }
            KernelFamily::Exponential { rate, prefactor } => {
                build_exponential_with_floor(self.geometry, *rate, *prefactor, self.floor)
            }
            KernelFamily::Custom { label } => Err(Error::param(
                "family",
                format!("custom kernel `{label}` cannot be rebuilt from its descriptor"),
            )),
        }
    }
}

/// Hermitian hopping kernel `H₀(x, y)` restricted to a box (no wrap-around).
#[derive(Debug, Clone)]
pub struct LatticeKernel {
    spec: KernelSpec,
    matrix: SparseMatrix,
}

impl LatticeKernel {
    /// Builds a Hermitian kernel from entries `(x, y, H₀(x,y))`.
    ///
    /// Each listed pair also sets the mirrored entry to the conjugate, so
    /// list every unordered pair once. Diagonal values keep only their real part.
    pub fn from_entries(
        geometry: BoxGeometry,
        entries: impl IntoIterator<Item = (usize, usize, C64)>,
        label: &str,
    ) -> Self {
        let n = geometry.site_count();
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); n];
        for (i, j, v) in entries {
            if v.norm() < DEFAULT_FLOOR {
                continue;
            }
            if i == j {
                rows[i].push((i, C64::new(v.re, 0.0)));
            } else {
                rows[i].push((j, v));
                rows[j].push((i, v.conj()));
            }
        }
        Self {
            spec: KernelSpec {
                geometry,
                family: KernelFamily::Custom {
                    label: label.to_string(),
                },
                floor: DEFAULT_FLOOR,
            },
            matrix: SparseMatrix::from_rows(rows),
        }
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn geometry(&self) -> &BoxGeometry {
        &self.spec.geometry
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn site_count(&self) -> usize {
        self.matrix.dim()
    }

    pub fn entry(&self, x: usize, y: usize) -> C64 {
        self.matrix.get(x, y)
    }

    /// `y = H₀ x`.
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        self.matrix.apply(x, y)
    }

    /// Spectral norm `‖H₀‖`.
    pub fn operator_norm(&self) -> Result<f64> {
        self.matrix.hermitian_norm()
    }

    /// Largest `|x - y|` over stored off-diagonal entries.
    pub fn hop_range(&self) -> f64 {
        let g = self.geometry();
        self.matrix
            .entries()
            .filter(|&(i, j, _)| i != j)
            .map(|(i, j, _)| g.distance(i, j))
            .fold(0.0, f64::max)
    }

    /// True when the infinite-lattice kernel has only polynomial decay.
    pub fn is_long_range(&self) -> bool {
        matches!(self.spec.family, KernelFamily::PowerLaw { .. })
    }
}

/// Nearest-neighbour adjacency on the box: `H₀(x,y) = 1` iff `|x-y|₁ = 1`.
pub fn build_laplacian(geometry: BoxGeometry) -> LatticeKernel {
    let n = geometry.site_count();
    let l = geometry.half_width as i64;
    let rows = par::map(&(0..n).collect::<Vec<_>>(), |&i| {
        let mut row = Vec::with_capacity(2 * geometry.dimension);
        let mut c = geometry.coords(i);
        for a in 0..geometry.dimension {
            for step in [-1i64, 1] {
                let orig = c[a];
                if (orig + step).abs() <= l {
                    c[a] = orig + step;
                    row.push((geometry.index_of(&c).expect("inside box"), C64::new(1.0, 0.0)));
                    c[a] = orig;
                }
            }
        }
        row
    });
    LatticeKernel {
        spec: KernelSpec {
            geometry,
            family: KernelFamily::Laplacian,
            floor: DEFAULT_FLOOR,
        },
        matrix: SparseMatrix::from_rows(rows),
    }
}

/// `H₀(x,y) = J |x-y|^{-p}` for `x ≠ y`; requires `p > d`.
pub fn build_powerlaw_kernel(geometry: BoxGeometry, exponent: f64, coupling: f64) -> Result<LatticeKernel> {
    build_powerlaw_with_floor(geometry, exponent, coupling, DEFAULT_FLOOR)
}

fn build_powerlaw_with_floor(
    geometry: BoxGeometry,
    exponent: f64,
    coupling: f64,
    floor: f64,
) -> Result<LatticeKernel> {
    geometry.validate()?;
    if !(exponent > geometry.dimension as f64) {
        return Err(Error::Summability {
            exponent,
            dimension: geometry.dimension,
        });
    }
    let matrix = dense_radial(geometry, floor, |r| coupling * r.powf(-exponent));
    Ok(LatticeKernel {
        spec: KernelSpec {
            geometry,
            family: KernelFamily::PowerLaw { exponent, coupling },
            floor,
        },
        matrix,
    })
}

/// `H₀(x,y) = B exp(-m|x-y|)` for `x ≠ y`; requires `m > 0`.
pub fn build_exponential_kernel(geometry: BoxGeometry, rate: f64, prefactor: f64) -> Result<LatticeKernel> {
    build_exponential_with_floor(geometry, rate, prefactor, DEFAULT_FLOOR)
}

fn build_exponential_with_floor(
    geometry: BoxGeometry,
    rate: f64,
    prefactor: f64,
    floor: f64,
) -> Result<LatticeKernel> {
    geometry.validate()?;
    if !(rate > 0.0) {
        return Err(Error::param("rate", format!("must be positive, got {rate}")));
    }
    let matrix = dense_radial(geometry, floor, |r| prefactor * (-rate * r).exp());
    Ok(LatticeKernel {
        spec: KernelSpec {
            geometry,
            family: KernelFamily::Exponential { rate, prefactor },
            floor,
        },
        matrix,
    })
}

fn dense_radial<F: Fn(f64) -> f64 + Sync + Send>(geometry: BoxGeometry, floor: f64, profile: F) -> SparseMatrix {
    let n = geometry.site_count();
    let rows = par::map(&(0..n).collect::<Vec<_>>(), |&i| {
        (0..n)
            .filter(|&j| j != i)
            .filter_map(|j| {
                let v = profile(geometry.distance(i, j));
                (v.abs() >= floor).then_some((j, C64::new(v, 0.0)))
            })
            .collect::<Vec<_>>()
    });
    SparseMatrix::from_rows(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(l: usize) -> BoxGeometry {
        BoxGeometry::cube(1, l).unwrap()
    }

    #[test]
    fn laplacian_three_sites() {
        let k = build_laplacian(line(1));
        let d = k.matrix().to_dense();
        for i in 0..3usize {
            for j in 0..3 {
                let expect = if i.abs_diff(j) == 1 { 1.0 } else { 0.0 };
                assert_eq!(d[(i, j)], C64::new(expect, 0.0));
            }
        }
    }

    #[test]
    fn laplacian_interior_row_2d() {
        let g = BoxGeometry::cube(2, 2).unwrap();
        let k = build_laplacian(g);
        let row: Vec<_> = k.matrix().row(g.origin()).collect();
        assert_eq!(row.len(), 4);
        assert!(row.iter().all(|&(_, v)| v == C64::new(1.0, 0.0)));
        assert!(k.matrix().hermitian_residue() == 0.0);
    }

    #[test]
    fn laplacian_spectral_radius_at_most_two() {
        let k = build_laplacian(line(64));
        let (vals, _) = crate::linalg::hermitian_eigen(&k.matrix().to_dense());
        assert!(vals.iter().all(|v| v.abs() <= 2.0 + 1e-12));
    }

    #[test]
    fn powerlaw_entries() {
        let g = line(5);
        let k = build_powerlaw_kernel(g, 4.0, 1.0).unwrap();
        let o = g.origin();
        assert!((k.entry(o, o + 2).re - 1.0 / 16.0).abs() < 1e-15);
        assert_eq!(k.entry(o, o), C64::new(0.0, 0.0));
        let zero = build_powerlaw_kernel(g, 4.0, 0.0).unwrap();
        assert_eq!(zero.matrix().nnz(), 0);
    }

    #[test]
    fn powerlaw_rejects_nonsummable_exponent() {
        let g = BoxGeometry::cube(2, 3).unwrap();
        assert!(matches!(
            build_powerlaw_kernel(g, 2.0, 1.0),
            Err(Error::Summability { .. })
        ));
        assert!(build_powerlaw_kernel(line(3), 1.0, 1.0).is_err());
    }

    #[test]
    fn exponential_kernel_limits() {
        let g = line(10);
        assert_eq!(build_exponential_kernel(g, 1.0, 0.0).unwrap().matrix().nnz(), 0);
        let k = build_exponential_kernel(g, 20.0, 1.0).unwrap();
        for (i, j, v) in k.matrix().entries() {
            if g.distance(i, j) > 1.0 {
                assert!(v.norm() < 1e-8);
            }
        }
        assert!(build_exponential_kernel(g, 0.0, 1.0).is_err());
    }

    #[test]
    fn spec_round_trips_through_json() {
        let spec = KernelSpec {
            geometry: BoxGeometry::cube(1, 8).unwrap(),
            family: KernelFamily::PowerLaw {
                exponent: 4.0,
                coupling: 0.5,
            },
            floor: 1e-14,
        };
        let json = serde_json::to_string(&spec).unwrap();
        let back: KernelSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
        let a = spec.build().unwrap();
        let b = back.build().unwrap();
        assert_eq!(a.matrix(), b.matrix());
    }
}
